#include "mter/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mter {

namespace {

std::runtime_error parse_error(const std::string& path, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  return std::runtime_error(os.str());
}

}  // namespace

LexiconList load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);

  LexiconList entries;
  std::set<std::tuple<std::string, std::string, int>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 3) throw parse_error(path, lineno, "expected 3 tab-separated columns");
    if (cols[0].empty() || cols[1].empty())
      throw parse_error(path, lineno, "empty feature or opinion token");
    int polarity;
    try {
      std::size_t pos = 0;
      polarity = std::stoi(cols[2], &pos);
      if (pos != cols[2].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw parse_error(path, lineno, "polarity is not an integer: " + cols[2]);
    }
    if (polarity != 1 && polarity != -1)
      throw parse_error(path, lineno, "polarity must be 1 or -1, got " + cols[2]);
    if (seen.insert({cols[0], cols[1], polarity}).second)
      entries.push_back({cols[0], cols[1], polarity});
  }
  return entries;
}

std::vector<ReviewRecord> load_reviews(const std::string& path, const LexiconList& lexicon, int N) {
  if (N < 2) throw std::invalid_argument("rating scale N must be >= 2");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reviews file: " + path);

  std::set<std::tuple<std::string, std::string, int>> lex;
  for (const auto& e : lexicon) lex.insert({e.feature, e.opinion, e.polarity});

  std::vector<ReviewRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw parse_error(path, lineno, std::string("invalid JSON: ") + e.what());
    }
    ReviewRecord rec;
    try {
      rec.user = j.at("user").get<std::string>();
      rec.item = j.at("item").get<std::string>();
      rec.rating = j.at("rating").get<int>();
      for (const auto& ph : j.at("phrases")) {
        LexiconEntry t;
        t.feature = ph.at("feature").get<std::string>();
        t.opinion = ph.at("opinion").get<std::string>();
        t.polarity = ph.at("polarity").get<int>();
        rec.tuples.push_back(std::move(t));
      }
    } catch (const nlohmann::json::exception& e) {
      throw parse_error(path, lineno, std::string("bad review schema: ") + e.what());
    }
    if (rec.rating < 1 || rec.rating > N)
      throw parse_error(path, lineno,
                        "rating " + std::to_string(rec.rating) + " outside [1, " + std::to_string(N) + "]");
    for (const auto& t : rec.tuples) {
      if (!lex.count({t.feature, t.opinion, t.polarity}))
        throw parse_error(path, lineno,
                          "tuple (" + t.feature + ", " + t.opinion + ", " + std::to_string(t.polarity) +
                              ") not in lexicon");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

IndexedCorpus recursive_filter(const std::vector<ReviewRecord>& reviews, const FilterConfig& cfg,
                               int N) {
  if (cfg.min_feature_support < 0 || cfg.min_review_tuples < 0 || cfg.min_user_reviews < 0 ||
      cfg.min_item_reviews < 0)
    throw std::invalid_argument("filter thresholds must be >= 0");

  // Working copies; tuples are pruned in place, reviews flagged dead.
  std::vector<ReviewRecord> work = reviews;
  std::vector<bool> alive(work.size(), true);

  bool changed = true;
  while (changed) {
    changed = false;

    // 1. feature support (total mentions across live reviews)
    std::unordered_map<std::string, int> support;
    for (std::size_t r = 0; r < work.size(); ++r) {
      if (!alive[r]) continue;
      for (const auto& t : work[r].tuples) support[t.feature]++;
    }
    for (std::size_t r = 0; r < work.size(); ++r) {
      if (!alive[r]) continue;
      auto& tuples = work[r].tuples;
      auto before = tuples.size();
      std::erase_if(tuples, [&](const LexiconEntry& t) {
        return support[t.feature] < cfg.min_feature_support;
      });
      if (tuples.size() != before) changed = true;
    }

    // 2. reviews with too few surviving tuples
    for (std::size_t r = 0; r < work.size(); ++r) {
      if (alive[r] && static_cast<int>(work[r].tuples.size()) < cfg.min_review_tuples) {
        alive[r] = false;
        changed = true;
      }
    }

    // 3. users / items with too few reviews
    std::unordered_map<std::string, int> user_count, item_count;
    for (std::size_t r = 0; r < work.size(); ++r) {
      if (!alive[r]) continue;
      user_count[work[r].user]++;
      item_count[work[r].item]++;
    }
    for (std::size_t r = 0; r < work.size(); ++r) {
      if (!alive[r]) continue;
      if (user_count[work[r].user] < cfg.min_user_reviews ||
          item_count[work[r].item] < cfg.min_item_reviews) {
        alive[r] = false;
        changed = true;
      }
    }
  }

  IndexedCorpus corpus;
  corpus.rating_scale = N;
  for (std::size_t r = 0; r < work.size(); ++r) {
    if (!alive[r]) continue;
    const auto& rec = work[r];
    IndexedReview ir;
    ir.user = corpus.users.intern(rec.user);
    ir.item = corpus.items.intern(rec.item);
    ir.rating = rec.rating;
    for (const auto& t : rec.tuples)
      ir.tuples.push_back({corpus.features.intern(t.feature), corpus.opinions.intern(t.opinion),
                           t.polarity});
    corpus.reviews.push_back(std::move(ir));
  }
  if (corpus.reviews.empty()) throw std::runtime_error("empty corpus after recursive filtering");
  return corpus;
}

CorpusSplit split_corpus(const IndexedCorpus& corpus, const SplitRatios& ratios,
                         std::uint64_t seed) {
  if (ratios.train <= 0 || ratios.valid <= 0 || ratios.test <= 0 ||
      std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must be positive and sum to 1");

  std::vector<std::vector<std::size_t>> per_user(corpus.users.size());
  for (std::size_t r = 0; r < corpus.reviews.size(); ++r)
    per_user[corpus.reviews[r].user].push_back(r);

  CorpusSplit split;
  for (IndexedCorpus* part : {&split.train, &split.valid, &split.test}) {
    part->users = corpus.users;
    part->items = corpus.items;
    part->features = corpus.features;
    part->opinions = corpus.opinions;
    part->rating_scale = corpus.rating_scale;
  }

  std::mt19937_64 rng(seed);
  for (std::size_t u = 0; u < per_user.size(); ++u) {
    auto idx = per_user[u];
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t c = idx.size();
    std::size_t n_valid = static_cast<std::size_t>(c * ratios.valid);
    std::size_t n_test = static_cast<std::size_t>(c * ratios.test);
    // train keeps the remainder, hence always >= 1 for a non-empty user
    std::size_t n_train = c - n_valid - n_test;
    std::sort(idx.begin(), idx.begin() + n_train);
    std::sort(idx.begin() + n_train, idx.begin() + n_train + n_valid);
    std::sort(idx.begin() + n_train + n_valid, idx.end());
    for (std::size_t i = 0; i < c; ++i) {
      IndexedCorpus& part =
          i < n_train ? split.train : (i < n_train + n_valid ? split.valid : split.test);
      part.reviews.push_back(corpus.reviews[idx[i]]);
    }
  }
  return split;
}

}  // namespace mter
