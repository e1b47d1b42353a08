#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "mter/corpus.hpp"
#include "mter/tensor.hpp"

namespace mter {

// Per-(user, item, feature) aggregate: summed polarity and mention count.
struct FeatureScore {
  int polarity_sum = 0;
  int mentions = 0;
};

using FeatureScoreTable = std::map<std::tuple<int, int, int>, FeatureScore>;

// Polarity sums over all mentions of a feature by a user about an item,
// merged across that user's reviews of the item.
FeatureScoreTable aggregate_feature_scores(const IndexedCorpus& train);

// Sigmoid mappings onto {0} u [1, N].
double map_feature_score(int polarity_sum, int N);   // 1 + (N-1) / (1 + e^-s)
double map_phrase_frequency(int frequency, int N);   // 1 + (N-1) (2 / (1 + e^-f) - 1)

// User x item x (feature + 1) observation tensor. Feature slices hold mapped
// feature scores; the last slice holds the overall rating of every training
// (user, item) pair (the maximum when a user reviewed an item repeatedly).
SparseTensor3 build_x(const FeatureScoreTable& scores, const IndexedCorpus& train);

// User x feature x opinion tensor over positive phrase frequencies.
SparseTensor3 build_yu(const IndexedCorpus& train);

// Item x feature x opinion tensor over positive phrase frequencies.
SparseTensor3 build_yi(const IndexedCorpus& train);

// Per-user pairwise preference structure. Explicit pairs cover rated-vs-rated
// items with strictly higher rating; rated-vs-unrated pairs are sampled on
// demand by the trainer from `observed`.
struct UserPairs {
  std::vector<std::pair<int, int>> explicit_pairs;  // (higher, lower)
  std::vector<std::pair<int, int>> observed;        // (item, merged rating)
};

struct PairOrderSet {
  std::vector<UserPairs> per_user;   // size m
  std::vector<int> user_of_review;   // one entry per training review, for
                                     // review-count-proportional user sampling
  int n_items = 0;
};

PairOrderSet build_pair_sets(const IndexedCorpus& train);

}  // namespace mter
