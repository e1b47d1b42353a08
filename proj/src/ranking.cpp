#include "mter/ranking.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace mter {

void sort_scored(std::vector<ScoredId>& scored) {
  std::stable_sort(scored.begin(), scored.end(), [](const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
}

std::vector<ScoredId> recommend_topk(const FactorModel& model, int user,
                                     const std::unordered_set<int>& training_items, int k) {
  if (k < 1) throw std::invalid_argument("recommend_topk: k must be >= 1");
  if (user < 0 || user >= model.m()) throw std::out_of_range("recommend_topk: unknown user");
  std::vector<ScoredId> scored;
  for (int j = 0; j < model.n(); ++j) {
    if (training_items.count(j)) continue;
    scored.push_back({j, predict_overall(model, user, j)});
  }
  sort_scored(scored);
  if (static_cast<int>(scored.size()) > k) scored.resize(k);
  return scored;
}

std::vector<ScoredId> rank_features(const FactorModel& model, int user, int item, int top_f) {
  if (top_f < 1) throw std::invalid_argument("rank_features: top_f must be >= 1");
  std::vector<ScoredId> scored;
  for (int f = 0; f < model.p(); ++f) scored.push_back({f, predict_x(model, user, item, f)});
  sort_scored(scored);
  if (static_cast<int>(scored.size()) > top_f) scored.resize(top_f);
  return scored;
}

std::vector<ScoredId> rank_opinions(const FactorModel& model, int user, int item, int feature,
                                    int top_w) {
  if (top_w < 1) throw std::invalid_argument("rank_opinions: top_w must be >= 1");
  if (feature < 0 || feature >= model.p())
    throw std::domain_error("rank_opinions: feature must be a real (non-dummy) feature");
  std::vector<ScoredId> scored;
  for (int w = 0; w < model.q(); ++w)
    scored.push_back({w, opinion_score(model, user, item, feature, w)});
  sort_scored(scored);
  if (static_cast<int>(scored.size()) > top_w) scored.resize(top_w);
  return scored;
}

std::string render_explanation(const std::string& item_name,
                               const std::vector<ExplainedFeature>& features) {
  if (features.empty()) throw std::invalid_argument("render_explanation: no features");
  for (const auto& f : features)
    if (f.phrases.empty())
      throw std::invalid_argument("render_explanation: feature without phrases: " + f.feature);

  std::ostringstream os;
  os << "Recommendation: " << item_name << "\nExplanation: ";
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (i > 0) os << ' ';
    os << "Its " << features[i].feature << " is";
    for (const auto& phrase : features[i].phrases) os << " [" << phrase << "]";
    os << '.';
  }
  return os.str();
}

}  // namespace mter
