#include "mter/training.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mter {

namespace {

constexpr int kMaxPairRetries = 20;

// log(sigma(d)) computed without overflow
double log_sigmoid(double d) {
  if (d >= 0.0) return -std::log1p(std::exp(-d));
  return d - std::log1p(std::exp(d));
}

double sigmoid(double d) {
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  double e = std::exp(d);
  return e / (1.0 + e);
}

// Accumulate coef * d(pred)/d(param) for pred = sum core[r][t][v] x[r] y[t] z[v].
void accumulate_entry(const Tensor3& core, std::span<const double> x, std::span<const double> y,
                      std::span<const double> z, double coef, Tensor3& gcore,
                      std::span<double> gx, std::span<double> gy, std::span<double> gz) {
  const std::size_t d1 = core.dim1(), d2 = core.dim2(), d3 = core.dim3();
  for (std::size_t r = 0; r < d1; ++r) {
    double acc_x = 0.0;
    for (std::size_t t = 0; t < d2; ++t) {
      double yz = 0.0;
      const double xy = x[r] * y[t];
      for (std::size_t v = 0; v < d3; ++v) {
        const double g = core(r, t, v);
        yz += g * z[v];
        gcore(r, t, v) += coef * xy * z[v];
        gz[v] += coef * g * xy;
      }
      acc_x += yz * y[t];
      gy[t] += coef * yz * x[r];
    }
    gx[r] += coef * acc_x;
  }
}

void add_scaled(std::vector<double>& out, const std::vector<double>& in, double scale) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * in[i];
}

void ada_step(std::vector<double>& theta, const std::vector<double>& grad,
              std::vector<double>& acc, double eta, double eps) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) throw std::runtime_error("adagrad step: non-finite gradient");
    acc[i] += g * g;
    theta[i] -= eta * g / std::sqrt(acc[i] + eps);
    if (theta[i] < 0.0) theta[i] = 0.0;
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (lambda_b < 0 || lambda_f < 0 || lambda_g < 0)
    throw std::invalid_argument("regularization weights must be >= 0");
  if (batch_x < 1 || batch_yu < 1 || batch_yi < 1 || n_s_bpr < 1)
    throw std::invalid_argument("batch sizes must be >= 1");
  if (t_iter < 0) throw std::invalid_argument("t_iter must be >= 0");
  if (eta <= 0) throw std::invalid_argument("eta must be > 0");
  if (ada_eps <= 0) throw std::invalid_argument("ada_eps must be > 0");
  if (eval_interval < 1) throw std::invalid_argument("eval_interval must be >= 1");
}

ParamSet ParamSet::zeros_like(const FactorModel& model) {
  ParamSet set;
  set.user = Matrix(model.user_factors.rows(), model.user_factors.cols());
  set.item = Matrix(model.item_factors.rows(), model.item_factors.cols());
  set.feature = Matrix(model.feature_factors.rows(), model.feature_factors.cols());
  set.opinion = Matrix(model.opinion_factors.rows(), model.opinion_factors.cols());
  set.core_x = Tensor3(model.core_x.dim1(), model.core_x.dim2(), model.core_x.dim3());
  set.core_yu = Tensor3(model.core_yu.dim1(), model.core_yu.dim2(), model.core_yu.dim3());
  set.core_yi = Tensor3(model.core_yi.dim1(), model.core_yi.dim2(), model.core_yi.dim3());
  return set;
}

BatchSet sample_batches(const SparseTensor3& x, const SparseTensor3& yu, const SparseTensor3& yi,
                        const PairOrderSet& pairs, const TrainConfig& cfg, std::mt19937_64& rng) {
  if (x.empty() || yu.empty() || yi.empty())
    throw std::invalid_argument("sample_batches: empty observation tensor");

  BatchSet batch;
  auto draw_tensor = [&rng](const SparseTensor3& t, int count, std::vector<TensorSample>& out) {
    std::uniform_int_distribution<std::size_t> pick(0, t.nnz() - 1);
    for (int s = 0; s < count; ++s) {
      const auto& e = t.entries()[pick(rng)];
      out.push_back({static_cast<int>(e.i1), static_cast<int>(e.i2), static_cast<int>(e.i3),
                     e.value});
    }
  };
  draw_tensor(x, cfg.batch_x, batch.x);
  draw_tensor(yu, cfg.batch_yu, batch.yu);
  draw_tensor(yi, cfg.batch_yi, batch.yi);

  if (pairs.user_of_review.empty()) return batch;
  std::uniform_int_distribution<std::size_t> pick_review(0, pairs.user_of_review.size() - 1);
  std::uniform_int_distribution<int> pick_item(0, pairs.n_items - 1);
  std::bernoulli_distribution lower_branch(0.5);

  for (int s = 0; s < cfg.n_s_bpr; ++s) {
    for (int attempt = 0; attempt < kMaxPairRetries; ++attempt) {
      const int u = pairs.user_of_review[pick_review(rng)];
      const auto& up = pairs.per_user[u];
      std::uniform_int_distribution<std::size_t> pick_obs(0, up.observed.size() - 1);
      const auto [j, rating_j] = up.observed[pick_obs(rng)];
      if (lower_branch(rng)) {
        std::vector<int> lower;
        for (const auto& [l, rating_l] : up.observed)
          if (rating_l < rating_j) lower.push_back(l);
        if (lower.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick_lower(0, lower.size() - 1);
        batch.pairs.push_back({u, j, lower[pick_lower(rng)]});
      } else {
        const int l = pick_item(rng);
        bool reviewed = false;
        for (const auto& [obs, r] : up.observed)
          if (obs == l) { reviewed = true; break; }
        if (reviewed) continue;
        batch.pairs.push_back({u, j, l});
      }
      break;
    }
  }
  return batch;
}

double bpr_term(const FactorModel& model, const std::vector<BprSample>& pairs) {
  double term = 0.0;
  for (const auto& pr : pairs)
    term -= log_sigmoid(predict_overall(model, pr.user, pr.pos) -
                        predict_overall(model, pr.user, pr.neg));
  return term;
}

LossRecord joint_loss(const FactorModel& model, const BatchSet& batch, const TrainConfig& cfg) {
  LossRecord rec;
  for (const auto& s : batch.x) {
    const double e = predict_x(model, s.i1, s.i2, s.i3) - s.value;
    rec.recon_x += e * e;
  }
  for (const auto& s : batch.yu) {
    const double e = predict_yu(model, s.i1, s.i2, s.i3) - s.value;
    rec.recon_yu += e * e;
  }
  for (const auto& s : batch.yi) {
    const double e = predict_yi(model, s.i1, s.i2, s.i3) - s.value;
    rec.recon_yi += e * e;
  }
  rec.bpr = cfg.lambda_b * bpr_term(model, batch.pairs);
  rec.reg = cfg.lambda_f * (model.user_factors.squared_norm() + model.item_factors.squared_norm() +
                            model.feature_factors.squared_norm() +
                            model.opinion_factors.squared_norm()) +
            cfg.lambda_g * (model.core_x.squared_norm() + model.core_yu.squared_norm() +
                            model.core_yi.squared_norm());
  rec.total = rec.recon_x + rec.recon_yu + rec.recon_yi + rec.bpr + rec.reg;
  return rec;
}

ParamSet compute_gradients(const FactorModel& model, const BatchSet& batch,
                           const TrainConfig& cfg) {
  ParamSet g = ParamSet::zeros_like(model);
  const int dummy = model.p();

  for (const auto& s : batch.x) {
    const double coef = 2.0 * (predict_x(model, s.i1, s.i2, s.i3) - s.value);
    accumulate_entry(model.core_x, model.user_factors.row(s.i1), model.item_factors.row(s.i2),
                     model.feature_factors.row(s.i3), coef, g.core_x, g.user.row(s.i1),
                     g.item.row(s.i2), g.feature.row(s.i3));
  }
  for (const auto& s : batch.yu) {
    const double coef = 2.0 * (predict_yu(model, s.i1, s.i2, s.i3) - s.value);
    accumulate_entry(model.core_yu, model.user_factors.row(s.i1), model.feature_factors.row(s.i2),
                     model.opinion_factors.row(s.i3), coef, g.core_yu, g.user.row(s.i1),
                     g.feature.row(s.i2), g.opinion.row(s.i3));
  }
  for (const auto& s : batch.yi) {
    const double coef = 2.0 * (predict_yi(model, s.i1, s.i2, s.i3) - s.value);
    accumulate_entry(model.core_yi, model.item_factors.row(s.i1), model.feature_factors.row(s.i2),
                     model.opinion_factors.row(s.i3), coef, g.core_yi, g.item.row(s.i1),
                     g.feature.row(s.i2), g.opinion.row(s.i3));
  }
  for (const auto& pr : batch.pairs) {
    const double d = predict_overall(model, pr.user, pr.pos) -
                     predict_overall(model, pr.user, pr.neg);
    const double coef = -cfg.lambda_b * sigmoid(-d);
    accumulate_entry(model.core_x, model.user_factors.row(pr.user),
                     model.item_factors.row(pr.pos), model.feature_factors.row(dummy), coef,
                     g.core_x, g.user.row(pr.user), g.item.row(pr.pos), g.feature.row(dummy));
    accumulate_entry(model.core_x, model.user_factors.row(pr.user),
                     model.item_factors.row(pr.neg), model.feature_factors.row(dummy), -coef,
                     g.core_x, g.user.row(pr.user), g.item.row(pr.neg), g.feature.row(dummy));
  }

  add_scaled(g.user.data(), model.user_factors.data(), 2.0 * cfg.lambda_f);
  add_scaled(g.item.data(), model.item_factors.data(), 2.0 * cfg.lambda_f);
  add_scaled(g.feature.data(), model.feature_factors.data(), 2.0 * cfg.lambda_f);
  add_scaled(g.opinion.data(), model.opinion_factors.data(), 2.0 * cfg.lambda_f);
  add_scaled(g.core_x.data(), model.core_x.data(), 2.0 * cfg.lambda_g);
  add_scaled(g.core_yu.data(), model.core_yu.data(), 2.0 * cfg.lambda_g);
  add_scaled(g.core_yi.data(), model.core_yi.data(), 2.0 * cfg.lambda_g);
  return g;
}

void adagrad_project_step(FactorModel& model, const ParamSet& grads, ParamSet& ada_state,
                          double eta, double ada_eps) {
  ada_step(model.user_factors.data(), grads.user.data(), ada_state.user.data(), eta, ada_eps);
  ada_step(model.item_factors.data(), grads.item.data(), ada_state.item.data(), eta, ada_eps);
  ada_step(model.feature_factors.data(), grads.feature.data(), ada_state.feature.data(), eta,
           ada_eps);
  ada_step(model.opinion_factors.data(), grads.opinion.data(), ada_state.opinion.data(), eta,
           ada_eps);
  ada_step(model.core_x.data(), grads.core_x.data(), ada_state.core_x.data(), eta, ada_eps);
  ada_step(model.core_yu.data(), grads.core_yu.data(), ada_state.core_yu.data(), eta, ada_eps);
  ada_step(model.core_yi.data(), grads.core_yi.data(), ada_state.core_yi.data(), eta, ada_eps);
}

TrainResult train(const SparseTensor3& x, const SparseTensor3& yu, const SparseTensor3& yi,
                  const PairOrderSet& pairs, const TrainConfig& cfg) {
  cfg.validate();
  const int m = static_cast<int>(x.dim1());
  const int n = static_cast<int>(x.dim2());
  const int p = static_cast<int>(x.dim3()) - 1;
  const int q = static_cast<int>(yu.dim3());

  TrainResult result;
  result.model = init_model(cfg.dims, m, n, p, q, cfg.seed, cfg.init_scale);
  ParamSet ada = ParamSet::zeros_like(result.model);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  for (int it = 0; it < cfg.t_iter; ++it) {
    BatchSet batch = sample_batches(x, yu, yi, pairs, cfg, rng);
    if (it % cfg.eval_interval == 0 || it + 1 == cfg.t_iter) {
      LossRecord rec = joint_loss(result.model, batch, cfg);
      rec.iteration = it;
      if (!std::isfinite(rec.total)) {
        std::ostringstream os;
        os << "training diverged at iteration " << it << " (total loss " << rec.total << ")";
        throw std::runtime_error(os.str());
      }
      result.trace.push_back(rec);
    }
    ParamSet grads = compute_gradients(result.model, batch, cfg);
    adagrad_project_step(result.model, grads, ada, cfg.eta, cfg.ada_eps);
  }
  return result;
}

double relative_bpr_weight(const TrainConfig& cfg, int m, int n) {
  if (m < 1 || n < 1) throw std::invalid_argument("m and n must be >= 1");
  return cfg.lambda_b * cfg.n_s_bpr * static_cast<double>(cfg.t_iter) /
         (static_cast<double>(m) * n * n);
}

}  // namespace mter
