#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "mter/model.hpp"

namespace mter {

struct ScoredId {
  int id;
  double score;
};

// Sort descending by score, ties broken by ascending id.
void sort_scored(std::vector<ScoredId>& scored);

// All items except the user's training items, scored by the predicted overall
// rating, sorted descending, truncated to k.
std::vector<ScoredId> recommend_topk(const FactorModel& model, int user,
                                     const std::unordered_set<int>& training_items, int k);

// Real features (dummy excluded) ranked by predicted affinity.
std::vector<ScoredId> rank_features(const FactorModel& model, int user, int item, int top_f);

// Opinion phrases for one feature ranked by the opinion score.
std::vector<ScoredId> rank_opinions(const FactorModel& model, int user, int item, int feature,
                                    int top_w);

struct ExplainedFeature {
  std::string feature;
  std::vector<std::string> phrases;
};

// Renders "Recommendation: <item>\nExplanation: Its <feature> is [p1] [p2]."
// with one sentence per feature, sentences separated by a single space.
std::string render_explanation(const std::string& item_name,
                               const std::vector<ExplainedFeature>& features);

}  // namespace mter
