#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <unordered_map>
#include <vector>

#include "mter/corpus.hpp"
#include "mter/model.hpp"
#include "mter/tensor.hpp"

namespace mter {

// Scores one (user, item) candidate; shared by MTER and all baselines so the
// candidate-exclusion rule is identical across them.
using Scorer = std::function<double(int user, int item)>;

// DCG with gain 2^g - 1 (or g when exponential = false) and log2(rank + 1)
// discount, normalized by the ideal ordering; 0 when there is no gain at all.
double ndcg_at_k(const std::vector<int>& ranked, const std::unordered_map<int, double>& gains,
                 int k, bool exponential = true);

struct RecEvalResult {
  std::vector<int> users;                       // evaluated users, ascending
  std::map<int, double> mean_ndcg;              // K -> macro-averaged NDCG
  std::map<int, std::vector<double>> per_user;  // K -> per-user NDCG, aligned with `users`
};

// Per test user with at least one test review: rank all non-training items by
// the scorer and measure NDCG against test ratings (max over repeat reviews).
RecEvalResult eval_recommendation(const Scorer& scorer, const IndexedCorpus& train,
                                  const IndexedCorpus& test, const std::vector<int>& ks,
                                  bool exponential = true);

struct ContentEvalResult {
  double feature_ndcg = 0;                // mean over test reviews
  double opinion_ndcg = 0;                // mean over (review, mentioned feature) units
  std::vector<double> per_review_feature;
  std::vector<double> per_unit_opinion;
};

// Feature ranking vs. the features a test review actually mentions (binary
// gain, NDCG@k_feature) and phrase ranking vs. the positive phrases it uses
// (binary gain, NDCG@k_opinion).
ContentEvalResult eval_content_prediction(const FactorModel& model, const IndexedCorpus& test,
                                          int k_feature = 20, int k_opinion = 50);

// Non-personalized baseline: items scored by training review count.
Scorer most_popular_baseline(const IndexedCorpus& train);

struct BprmfConfig {
  int factors = 8;
  double lambda = 0.01;
  double eta = 0.05;
  int iterations = 100000;
  std::uint64_t seed = 42;
  double init_scale = 0.1;
};

struct BprmfModel {
  Matrix user;  // m x factors
  Matrix item;  // n x factors

  double score(int u, int i) const {
    double s = 0.0;
    for (std::size_t f = 0; f < user.cols(); ++f) s += user(u, f) * item(i, f);
    return s;
  }
};

// Gradients of -ln sigma(P_u . (Q_j - Q_l)) + lambda (|P_u|^2 + |Q_j|^2 + |Q_l|^2)
// w.r.t. the three touched rows. Exposed for testing.
void bprmf_pair_gradients(const BprmfModel& model, int u, int j, int l, double lambda,
                          std::vector<double>& gu, std::vector<double>& gj,
                          std::vector<double>& gl);

// Matrix factorization trained with the BPR pairwise logistic loss by seeded SGD.
BprmfModel train_bprmf(const IndexedCorpus& train, const BprmfConfig& cfg);

enum class PermScope { user, item };

struct PermutationReport {
  double observed = 0;
  std::vector<double> permuted;
  double p_value = 1.0;
};

// Modal-phrase reuse statistic: over (entity, feature) groups with >= 2
// phrase occurrences, the mean fraction taken by the group's most frequent
// phrase. Permutations shuffle phrase assignments within each feature across
// the whole corpus, preserving global per-feature phrase counts.
PermutationReport permutation_test(const IndexedCorpus& corpus, PermScope scope, int n_perm,
                                   std::uint64_t seed);

struct PairedTTestResult {
  double t = 0;
  double p_value = 1.0;  // two-sided
};

PairedTTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mter
