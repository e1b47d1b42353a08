#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace mter {

struct LexiconEntry {
  std::string feature;
  std::string opinion;
  int polarity;  // +1 or -1
};

using LexiconList = std::vector<LexiconEntry>;

// A review with external string ids, as parsed from the input file.
struct ReviewRecord {
  std::string user;
  std::string item;
  int rating;
  std::vector<LexiconEntry> tuples;  // occurrences, with multiplicity
};

// A review re-expressed with dense indices.
struct IndexedTuple {
  int feature;
  int opinion;
  int polarity;
};

struct IndexedReview {
  int user;
  int item;
  int rating;
  std::vector<IndexedTuple> tuples;
};

// Bidirectional map external id string <-> dense index.
class IdMap {
 public:
  int intern(const std::string& external) {
    auto it = to_index_.find(external);
    if (it != to_index_.end()) return it->second;
    int idx = static_cast<int>(to_external_.size());
    to_index_.emplace(external, idx);
    to_external_.push_back(external);
    return idx;
  }

  int index_of(const std::string& external) const {
    auto it = to_index_.find(external);
    return it == to_index_.end() ? -1 : it->second;
  }

  const std::string& external_of(int idx) const { return to_external_.at(idx); }
  std::size_t size() const { return to_external_.size(); }
  const std::vector<std::string>& externals() const { return to_external_; }

 private:
  std::unordered_map<std::string, int> to_index_;
  std::vector<std::string> to_external_;
};

struct IndexedCorpus {
  IdMap users;
  IdMap items;
  IdMap features;
  IdMap opinions;
  std::vector<IndexedReview> reviews;
  int rating_scale = 5;  // N

  int m() const { return static_cast<int>(users.size()); }
  int n() const { return static_cast<int>(items.size()); }
  int p() const { return static_cast<int>(features.size()); }
  int q() const { return static_cast<int>(opinions.size()); }
};

struct FilterConfig {
  int min_feature_support = 2;
  int min_review_tuples = 1;
  int min_user_reviews = 2;
  int min_item_reviews = 2;
};

// Lexicon: TSV feature<TAB>opinion<TAB>polarity, '#' comment lines ignored.
// Deduplicates while preserving first-seen order. Throws on malformed lines
// with the offending line number.
LexiconList load_lexicon(const std::string& path);

// Reviews: JSON-lines, one object per line with keys user/item/rating/phrases.
// Every phrase must be a lexicon entry and every rating must be in [1, N].
std::vector<ReviewRecord> load_reviews(const std::string& path, const LexiconList& lexicon, int N);

// Recursive support filtering to a fixpoint: drop features below support,
// then reviews with too few surviving tuples, then users/items with too few
// reviews. Re-indexes surviving entities densely in first-appearance order.
IndexedCorpus recursive_filter(const std::vector<ReviewRecord>& reviews, const FilterConfig& cfg,
                               int N);

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  IndexedCorpus train;
  IndexedCorpus valid;
  IndexedCorpus test;
};

// Per-user stratified random split. Every user with at least one review keeps
// at least one review in train. Reproducible for a fixed seed; the three parts
// share the input corpus' id maps.
CorpusSplit split_corpus(const IndexedCorpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace mter
