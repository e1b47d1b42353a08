#include "mter/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "mter/ranking.hpp"

namespace mter {

namespace {

double gain_value(double g, bool exponential) {
  return exponential ? std::exp2(g) - 1.0 : g;
}

double sigmoid(double d) {
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  double e = std::exp(d);
  return e / (1.0 + e);
}

// Continued-fraction evaluation of the regularized incomplete beta function.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 200;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_beta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log(1.0 - x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(ln_beta) * betacf(a, b, x) / a;
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        b * std::log(1.0 - x) + a * std::log(x)) *
                   betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double ndcg_at_k(const std::vector<int>& ranked, const std::unordered_map<int, double>& gains,
                 int k, bool exponential) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");

  double dcg = 0.0;
  const int depth = std::min<int>(k, static_cast<int>(ranked.size()));
  for (int r = 0; r < depth; ++r) {
    auto it = gains.find(ranked[r]);
    if (it != gains.end()) dcg += gain_value(it->second, exponential) / std::log2(r + 2.0);
  }

  std::vector<double> ideal;
  ideal.reserve(gains.size());
  for (const auto& [id, g] : gains) ideal.push_back(g);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (int r = 0; r < std::min<int>(k, static_cast<int>(ideal.size())); ++r)
    idcg += gain_value(ideal[r], exponential) / std::log2(r + 2.0);

  return idcg == 0.0 ? 0.0 : dcg / idcg;
}

RecEvalResult eval_recommendation(const Scorer& scorer, const IndexedCorpus& train,
                                  const IndexedCorpus& test, const std::vector<int>& ks,
                                  bool exponential) {
  const int m = train.m();
  const int n = train.n();

  std::vector<std::unordered_set<int>> train_items(m);
  for (const auto& review : train.reviews) train_items[review.user].insert(review.item);

  std::vector<std::unordered_map<int, double>> gains(m);
  for (const auto& review : test.reviews) {
    double& g = gains[review.user][review.item];
    g = std::max(g, static_cast<double>(review.rating));
  }

  RecEvalResult result;
  for (int u = 0; u < m; ++u) {
    if (gains[u].empty()) continue;
    std::vector<ScoredId> scored;
    for (int j = 0; j < n; ++j) {
      if (train_items[u].count(j)) continue;
      scored.push_back({j, scorer(u, j)});
    }
    sort_scored(scored);
    std::vector<int> ranked;
    ranked.reserve(scored.size());
    for (const auto& s : scored) ranked.push_back(s.id);

    result.users.push_back(u);
    for (int k : ks) result.per_user[k].push_back(ndcg_at_k(ranked, gains[u], k, exponential));
  }
  if (result.users.empty()) throw std::runtime_error("eval_recommendation: no evaluable users");

  for (int k : ks) {
    const auto& vals = result.per_user[k];
    double sum = 0.0;
    for (double v : vals) sum += v;
    result.mean_ndcg[k] = sum / vals.size();
  }
  return result;
}

ContentEvalResult eval_content_prediction(const FactorModel& model, const IndexedCorpus& test,
                                          int k_feature, int k_opinion) {
  ContentEvalResult result;
  const int p = model.p();
  const int q = model.q();

  for (const auto& review : test.reviews) {
    if (review.tuples.empty()) continue;
    std::unordered_map<int, double> feature_gains;
    std::unordered_map<int, std::unordered_map<int, double>> phrase_gains;  // feature -> phrases
    for (const auto& t : review.tuples) {
      if (t.feature >= p) continue;
      feature_gains[t.feature] = 1.0;
      if (t.polarity > 0 && t.opinion < q) phrase_gains[t.feature][t.opinion] = 1.0;
    }
    if (feature_gains.empty()) continue;

    std::vector<ScoredId> feats = rank_features(model, review.user, review.item, p);
    std::vector<int> ranked_feats;
    for (const auto& s : feats) ranked_feats.push_back(s.id);
    result.per_review_feature.push_back(ndcg_at_k(ranked_feats, feature_gains, k_feature, false));

    for (const auto& [k, gains] : phrase_gains) {
      if (gains.empty()) continue;
      std::vector<ScoredId> phrases = rank_opinions(model, review.user, review.item, k, q);
      std::vector<int> ranked_phrases;
      for (const auto& s : phrases) ranked_phrases.push_back(s.id);
      result.per_unit_opinion.push_back(ndcg_at_k(ranked_phrases, gains, k_opinion, false));
    }
  }

  auto mean = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };
  result.feature_ndcg = mean(result.per_review_feature);
  result.opinion_ndcg = mean(result.per_unit_opinion);
  return result;
}

Scorer most_popular_baseline(const IndexedCorpus& train) {
  auto counts = std::make_shared<std::vector<double>>(train.n(), 0.0);
  for (const auto& review : train.reviews) (*counts)[review.item] += 1.0;
  return [counts](int, int item) { return (*counts)[item]; };
}

void bprmf_pair_gradients(const BprmfModel& model, int u, int j, int l, double lambda,
                          std::vector<double>& gu, std::vector<double>& gj,
                          std::vector<double>& gl) {
  const std::size_t f = model.user.cols();
  gu.assign(f, 0.0);
  gj.assign(f, 0.0);
  gl.assign(f, 0.0);
  const double d = model.score(u, j) - model.score(u, l);
  const double coef = -sigmoid(-d);
  for (std::size_t k = 0; k < f; ++k) {
    gu[k] = coef * (model.item(j, k) - model.item(l, k)) + 2.0 * lambda * model.user(u, k);
    gj[k] = coef * model.user(u, k) + 2.0 * lambda * model.item(j, k);
    gl[k] = -coef * model.user(u, k) + 2.0 * lambda * model.item(l, k);
  }
}

BprmfModel train_bprmf(const IndexedCorpus& train, const BprmfConfig& cfg) {
  if (cfg.factors < 1 || cfg.eta <= 0 || cfg.lambda < 0 || cfg.iterations < 0)
    throw std::invalid_argument("invalid BPRMF config");
  const int m = train.m();
  const int n = train.n();

  std::vector<int> user_of_review;
  std::vector<std::unordered_set<int>> observed(m);
  for (const auto& review : train.reviews) {
    user_of_review.push_back(review.user);
    observed[review.user].insert(review.item);
  }
  std::vector<std::vector<int>> observed_list(m);
  for (int u = 0; u < m; ++u) observed_list[u].assign(observed[u].begin(), observed[u].end());
  for (auto& v : observed_list) std::sort(v.begin(), v.end());

  BprmfModel model;
  model.user = Matrix(m, cfg.factors);
  model.item = Matrix(n, cfg.factors);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> init(-cfg.init_scale, cfg.init_scale);
  for (double& v : model.user.data()) v = init(rng);
  for (double& v : model.item.data()) v = init(rng);

  std::uniform_int_distribution<std::size_t> pick_review(0, user_of_review.size() - 1);
  std::uniform_int_distribution<int> pick_item(0, n - 1);
  std::vector<double> gu, gj, gl;

  for (int it = 0; it < cfg.iterations; ++it) {
    const int u = user_of_review[pick_review(rng)];
    if (observed_list[u].empty() || static_cast<int>(observed_list[u].size()) == n) continue;
    std::uniform_int_distribution<std::size_t> pick_pos(0, observed_list[u].size() - 1);
    const int j = observed_list[u][pick_pos(rng)];
    int l = pick_item(rng);
    int guard = 0;
    while (observed[u].count(l) && ++guard < 50) l = pick_item(rng);
    if (observed[u].count(l)) continue;

    bprmf_pair_gradients(model, u, j, l, cfg.lambda, gu, gj, gl);
    for (int k = 0; k < cfg.factors; ++k) {
      model.user(u, k) -= cfg.eta * gu[k];
      model.item(j, k) -= cfg.eta * gj[k];
      model.item(l, k) -= cfg.eta * gl[k];
      if (!std::isfinite(model.user(u, k)) || !std::isfinite(model.item(j, k)))
        throw std::runtime_error("BPRMF training diverged at iteration " + std::to_string(it));
    }
  }
  return model;
}

PermutationReport permutation_test(const IndexedCorpus& corpus, PermScope scope, int n_perm,
                                   std::uint64_t seed) {
  if (n_perm <= 0) throw std::invalid_argument("permutation_test: n_perm must be > 0");
  if (corpus.reviews.empty()) throw std::invalid_argument("permutation_test: empty corpus");

  const int p = corpus.p();
  // Per feature: the (entity, phrase) occurrence slots across the whole corpus.
  std::vector<std::vector<std::pair<int, int>>> slots(p);
  for (const auto& review : corpus.reviews) {
    const int entity = scope == PermScope::user ? review.user : review.item;
    for (const auto& t : review.tuples) slots[t.feature].emplace_back(entity, t.opinion);
  }

  auto statistic = [&](const std::vector<std::vector<std::pair<int, int>>>& occ) {
    double sum = 0.0;
    int groups = 0;
    for (int k = 0; k < p; ++k) {
      std::unordered_map<int, std::unordered_map<int, int>> by_entity;
      for (const auto& [entity, phrase] : occ[k]) by_entity[entity][phrase]++;
      for (const auto& [entity, counts] : by_entity) {
        int total = 0, modal = 0;
        for (const auto& [phrase, c] : counts) {
          total += c;
          modal = std::max(modal, c);
        }
        if (total < 2) continue;  // singletons are permutation-invariant
        sum += static_cast<double>(modal) / total;
        ++groups;
      }
    }
    if (groups == 0)
      throw std::runtime_error("permutation_test: no entity reuses any feature (all singletons)");
    return sum / groups;
  };

  PermutationReport report;
  report.observed = statistic(slots);

  std::mt19937_64 rng(seed);
  auto permuted = slots;
  for (int r = 0; r < n_perm; ++r) {
    for (int k = 0; k < p; ++k) {
      // shuffle the phrase column, keeping the entity column fixed
      std::vector<int> phrases;
      phrases.reserve(permuted[k].size());
      for (const auto& [entity, phrase] : permuted[k]) phrases.push_back(phrase);
      std::shuffle(phrases.begin(), phrases.end(), rng);
      for (std::size_t s = 0; s < phrases.size(); ++s) permuted[k][s].second = phrases[s];
    }
    report.permuted.push_back(statistic(permuted));
  }

  int ge = 0;
  for (double v : report.permuted)
    if (v >= report.observed) ++ge;
  report.p_value = static_cast<double>(ge) / n_perm;
  return report;
}

PairedTTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("paired_t_test: need two equal-length samples of size >= 2");
  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= n;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    var += d * d;
  }
  var /= (n - 1);

  PairedTTestResult result;
  if (var == 0.0) {
    result.t = mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity() * (mean > 0 ? 1 : -1);
    result.p_value = mean == 0.0 ? 1.0 : 0.0;
    return result;
  }
  result.t = mean / std::sqrt(var / n);
  const double df = static_cast<double>(n - 1);
  result.p_value = reg_incomplete_beta(df / 2.0, 0.5, df / (df + result.t * result.t));
  return result;
}

}  // namespace mter
