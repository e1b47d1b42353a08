#include <doctest.h>

#include <algorithm>
#include <set>

#include "mter/corpus.hpp"
#include "testutil.hpp"

using namespace mter;

namespace {

const char* kLexicon =
    "screen\tclear\t1\n"
    "battery\tshort\t-1\n"
    "battery\tlasting\t1\n"
    "grip\tfirm\t1\n";

std::string review_line(const std::string& user, const std::string& item, int rating,
                        const std::string& phrases) {
  return "{\"user\":\"" + user + "\",\"item\":\"" + item +
         "\",\"rating\":" + std::to_string(rating) + ",\"phrases\":[" + phrases + "]}\n";
}

const char* kPhraseScreen = R"({"feature":"screen","opinion":"clear","polarity":1})";
const char* kPhraseBattery = R"({"feature":"battery","opinion":"short","polarity":-1})";

}  // namespace

TEST_CASE("load_lexicon parses TSV with comments and dedup") {
  testutil::TempDir tmp;
  auto path = tmp.write("lex.tsv",
                        "# comment\n"
                        "screen\tclear\t1\n"
                        "battery\tshort\t-1\n"
                        "screen\tclear\t1\n");
  auto entries = load_lexicon(path.string());
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].feature == "screen");
  CHECK(entries[0].opinion == "clear");
  CHECK(entries[0].polarity == 1);
  CHECK(entries[1].polarity == -1);
}

TEST_CASE("load_lexicon empty file") {
  testutil::TempDir tmp;
  auto path = tmp.write("lex.tsv", "");
  CHECK(load_lexicon(path.string()).empty());
}

TEST_CASE("load_lexicon rejects bad polarity with line number") {
  testutil::TempDir tmp;
  auto path = tmp.write("lex.tsv", "screen\tclear\t2\n");
  CHECK_THROWS_WITH_AS(load_lexicon(path.string()), doctest::Contains(":1:"),
                       std::runtime_error);
}

TEST_CASE("load_lexicon rejects wrong column count") {
  testutil::TempDir tmp;
  auto path = tmp.write("lex.tsv", "screen\tclear\n");
  CHECK_THROWS_AS(load_lexicon(path.string()), std::runtime_error);
}

TEST_CASE("load_reviews parses well-formed lines") {
  testutil::TempDir tmp;
  auto lex = load_lexicon(tmp.write("lex.tsv", kLexicon).string());
  auto path = tmp.write("r.jsonl", review_line("u1", "i1", 5, kPhraseScreen) +
                                       review_line("u1", "i2", 3, kPhraseBattery) +
                                       review_line("u2", "i1", 4, ""));
  auto records = load_reviews(path.string(), lex, 5);
  REQUIRE(records.size() == 3);
  CHECK(records[0].tuples.size() == 1);
  CHECK(records[2].tuples.empty());
}

TEST_CASE("load_reviews rejects out-of-range rating") {
  testutil::TempDir tmp;
  auto lex = load_lexicon(tmp.write("lex.tsv", kLexicon).string());
  auto path = tmp.write("r.jsonl", review_line("u1", "i1", 6, kPhraseScreen));
  CHECK_THROWS_AS(load_reviews(path.string(), lex, 5), std::runtime_error);
}

TEST_CASE("load_reviews rejects tuple absent from lexicon, naming it") {
  testutil::TempDir tmp;
  auto lex = load_lexicon(tmp.write("lex.tsv", kLexicon).string());
  auto path = tmp.write(
      "r.jsonl", review_line("u1", "i1", 5, R"({"feature":"weight","opinion":"light","polarity":1})"));
  CHECK_THROWS_WITH_AS(load_reviews(path.string(), lex, 5), doctest::Contains("weight"),
                       std::runtime_error);
}

TEST_CASE("load_reviews keeps tuple multiplicity") {
  testutil::TempDir tmp;
  auto lex = load_lexicon(tmp.write("lex.tsv", kLexicon).string());
  auto path = tmp.write("r.jsonl", review_line("u1", "i1", 5, std::string(kPhraseScreen) + "," +
                                                                  kPhraseScreen));
  auto records = load_reviews(path.string(), lex, 5);
  REQUIRE(records.size() == 1);
  CHECK(records[0].tuples.size() == 2);
}

namespace {

ReviewRecord make_review(const std::string& u, const std::string& i, int rating,
                         std::vector<std::string> features) {
  ReviewRecord rec{u, i, rating, {}};
  for (auto& f : features) rec.tuples.push_back({f, "good", 1});
  return rec;
}

}  // namespace

TEST_CASE("recursive_filter with zero thresholds only re-indexes") {
  std::vector<ReviewRecord> reviews = {make_review("u1", "i1", 5, {"a"}),
                                       make_review("u2", "i2", 3, {"b"})};
  auto corpus = recursive_filter(reviews, {0, 0, 0, 0}, 5);
  CHECK(corpus.reviews.size() == 2);
  CHECK(corpus.m() == 2);
  CHECK(corpus.n() == 2);
  CHECK(corpus.p() == 2);
  CHECK(corpus.users.index_of("u1") == 0);
  CHECK(corpus.users.index_of("u2") == 1);
}

TEST_CASE("recursive_filter drops rare feature and dependent tuple") {
  std::vector<ReviewRecord> reviews = {make_review("u1", "i1", 5, {"common", "rare"}),
                                       make_review("u2", "i1", 4, {"common"})};
  auto corpus = recursive_filter(reviews, {2, 1, 1, 1}, 5);
  CHECK(corpus.p() == 1);
  CHECK(corpus.features.index_of("rare") == -1);
  CHECK(corpus.reviews[0].tuples.size() == 1);
}

TEST_CASE("recursive_filter cascades to fixpoint") {
  // hand-traced: feature "x" appears once -> removed -> u5's only review loses
  // its single tuple -> review removed -> u5 removed; i3 then has one review
  // from u1, below min_item_reviews -> that review removed; u1 still has 2.
  std::vector<ReviewRecord> reviews = {
      make_review("u1", "i1", 5, {"a", "a"}), make_review("u1", "i2", 4, {"a"}),
      make_review("u1", "i3", 3, {"a"}),      make_review("u2", "i1", 2, {"a"}),
      make_review("u2", "i2", 5, {"a"}),      make_review("u3", "i1", 4, {"a"}),
      make_review("u3", "i2", 1, {"a"}),      make_review("u4", "i1", 3, {"a"}),
      make_review("u4", "i2", 2, {"a"}),      make_review("u5", "i3", 5, {"x"}),
  };
  auto corpus = recursive_filter(reviews, {2, 1, 2, 2}, 5);
  CHECK(corpus.users.index_of("u5") == -1);
  CHECK(corpus.items.index_of("i3") == -1);
  CHECK(corpus.features.index_of("x") == -1);
  CHECK(corpus.m() == 4);
  CHECK(corpus.n() == 2);
  CHECK(corpus.reviews.size() == 8);
}

TEST_CASE("recursive_filter is idempotent") {
  std::vector<ReviewRecord> reviews = {
      make_review("u1", "i1", 5, {"a", "b"}), make_review("u1", "i2", 4, {"a"}),
      make_review("u2", "i1", 2, {"a"}),      make_review("u2", "i2", 5, {"b", "b"}),
      make_review("u3", "i3", 4, {"c"}),
  };
  FilterConfig cfg{2, 1, 2, 2};
  auto once = recursive_filter(reviews, cfg, 5);

  // re-express the output as ReviewRecords and filter again
  std::vector<ReviewRecord> round;
  for (const auto& r : once.reviews) {
    ReviewRecord rec{once.users.external_of(r.user), once.items.external_of(r.item), r.rating, {}};
    for (const auto& t : r.tuples)
      rec.tuples.push_back(
          {once.features.external_of(t.feature), once.opinions.external_of(t.opinion), t.polarity});
    round.push_back(std::move(rec));
  }
  auto twice = recursive_filter(round, cfg, 5);
  CHECK(twice.reviews.size() == once.reviews.size());
  CHECK(twice.m() == once.m());
  CHECK(twice.n() == once.n());
  CHECK(twice.p() == once.p());
  CHECK(twice.q() == once.q());
}

TEST_CASE("recursive_filter reports empty corpus") {
  std::vector<ReviewRecord> reviews = {make_review("u1", "i1", 5, {"a"})};
  CHECK_THROWS_WITH_AS(recursive_filter(reviews, {5, 1, 1, 1}, 5), doctest::Contains("empty"),
                       std::runtime_error);
}

TEST_CASE("id maps round-trip") {
  std::vector<ReviewRecord> reviews = {make_review("u1", "i1", 5, {"a"}),
                                       make_review("u2", "i2", 3, {"b"})};
  auto corpus = recursive_filter(reviews, {0, 0, 0, 0}, 5);
  for (int u = 0; u < corpus.m(); ++u)
    CHECK(corpus.users.index_of(corpus.users.external_of(u)) == u);
  for (int f = 0; f < corpus.p(); ++f)
    CHECK(corpus.features.index_of(corpus.features.external_of(f)) == f);
}

TEST_CASE("split_corpus 10 reviews at 80/10/10") {
  std::vector<ReviewRecord> reviews;
  for (int i = 0; i < 10; ++i)
    reviews.push_back(make_review("u1", "i" + std::to_string(i), 1 + i % 5, {"a"}));
  auto corpus = recursive_filter(reviews, {0, 0, 0, 0}, 5);
  auto split = split_corpus(corpus, {0.8, 0.1, 0.1}, 7);
  CHECK(split.train.reviews.size() == 8);
  CHECK(split.valid.reviews.size() == 1);
  CHECK(split.test.reviews.size() == 1);
}

TEST_CASE("split_corpus deterministic per seed") {
  std::vector<ReviewRecord> reviews;
  for (int u = 0; u < 5; ++u)
    for (int i = 0; i < 7; ++i)
      reviews.push_back(
          make_review("u" + std::to_string(u), "i" + std::to_string(i), 1 + (u + i) % 5, {"a"}));
  auto corpus = recursive_filter(reviews, {0, 0, 0, 0}, 5);
  auto s1 = split_corpus(corpus, {0.8, 0.1, 0.1}, 99);
  auto s2 = split_corpus(corpus, {0.8, 0.1, 0.1}, 99);
  REQUIRE(s1.train.reviews.size() == s2.train.reviews.size());
  for (std::size_t i = 0; i < s1.train.reviews.size(); ++i) {
    CHECK(s1.train.reviews[i].user == s2.train.reviews[i].user);
    CHECK(s1.train.reviews[i].item == s2.train.reviews[i].item);
  }
}

TEST_CASE("split_corpus keeps single-review users in train") {
  std::vector<ReviewRecord> reviews = {make_review("u1", "i1", 5, {"a"})};
  auto corpus = recursive_filter(reviews, {0, 0, 0, 0}, 5);
  auto split = split_corpus(corpus, {0.8, 0.1, 0.1}, 3);
  CHECK(split.train.reviews.size() == 1);
  CHECK(split.valid.reviews.empty());
  CHECK(split.test.reviews.empty());
}

TEST_CASE("split_corpus partitions the input") {
  std::vector<ReviewRecord> reviews;
  for (int u = 0; u < 6; ++u)
    for (int i = 0; i < 9; ++i)
      reviews.push_back(
          make_review("u" + std::to_string(u), "i" + std::to_string((u * 3 + i) % 11),
                      1 + (u * i) % 5, {"a"}));
  auto corpus = recursive_filter(reviews, {0, 0, 0, 0}, 5);
  auto split = split_corpus(corpus, {0.8, 0.1, 0.1}, 5);

  auto key = [](const IndexedReview& r) { return std::make_tuple(r.user, r.item, r.rating); };
  std::multiset<std::tuple<int, int, int>> all, parts;
  for (const auto& r : corpus.reviews) all.insert(key(r));
  for (const auto* part : {&split.train, &split.valid, &split.test})
    for (const auto& r : part->reviews) parts.insert(key(r));
  CHECK(all == parts);
}

TEST_CASE("split_corpus rejects bad ratios") {
  std::vector<ReviewRecord> reviews = {make_review("u1", "i1", 5, {"a"})};
  auto corpus = recursive_filter(reviews, {0, 0, 0, 0}, 5);
  CHECK_THROWS_AS(split_corpus(corpus, {0.8, 0.1, 0.2}, 3), std::invalid_argument);
}
