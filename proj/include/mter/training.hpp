#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mter/build.hpp"
#include "mter/model.hpp"
#include "mter/tensor.hpp"

namespace mter {

struct TrainConfig {
  double lambda_b = 1.0;   // BPR trade-off weight
  double lambda_f = 0.01;  // L2 weight on factor matrices
  double lambda_g = 0.01;  // L2 weight on core tensors
  int batch_x = 256;
  int batch_yu = 128;
  int batch_yi = 128;
  int n_s_bpr = 256;       // BPR pairs sampled per iteration
  int t_iter = 20000;
  double eta = 0.05;
  double ada_eps = 1e-8;
  std::uint64_t seed = 42;
  Dims dims;
  double init_scale = 0.1;
  int eval_interval = 500;

  void validate() const;
};

struct TensorSample {
  int i1, i2, i3;
  double value;
};

struct BprSample {
  int user, pos, neg;
};

struct BatchSet {
  std::vector<TensorSample> x, yu, yi;
  std::vector<BprSample> pairs;
};

// Gradients (or AdaGrad accumulators) shaped like a FactorModel.
struct ParamSet {
  Matrix user, item, feature, opinion;
  Tensor3 core_x, core_yu, core_yi;

  static ParamSet zeros_like(const FactorModel& model);
};

struct LossRecord {
  int iteration = 0;
  double recon_x = 0, recon_yu = 0, recon_yi = 0;
  double bpr = 0;  // lambda_b-weighted
  double reg = 0;
  double total = 0;
};

using LossTrace = std::vector<LossRecord>;

// Uniform-with-replacement draws from each tensor's stored entries plus BPR
// pair draws: user proportional to review count, an observed item j, then with
// probability 0.5 a strictly-lower-rated observed item, otherwise a uniformly
// random unreviewed item. Invalid draws are retried a bounded number of times.
BatchSet sample_batches(const SparseTensor3& x, const SparseTensor3& yu, const SparseTensor3& yi,
                        const PairOrderSet& pairs, const TrainConfig& cfg, std::mt19937_64& rng);

// -sum ln sigma(x_hat_ij - x_hat_il) over the pairs; weight applied by caller.
double bpr_term(const FactorModel& model, const std::vector<BprSample>& pairs);

// Batch-restricted squared error + weighted BPR + L2 terms.
LossRecord joint_loss(const FactorModel& model, const BatchSet& batch, const TrainConfig& cfg);

// Analytic gradients of joint_loss w.r.t. every model parameter.
ParamSet compute_gradients(const FactorModel& model, const BatchSet& batch,
                           const TrainConfig& cfg);

// theta <- max(0, theta - eta * g / sqrt(acc + eps)), acc += g^2.
void adagrad_project_step(FactorModel& model, const ParamSet& grads, ParamSet& ada_state,
                          double eta, double ada_eps);

struct TrainResult {
  FactorModel model;
  LossTrace trace;
};

// Mini-batch projected AdaGrad over the joint objective. Deterministic per
// seed; aborts with a diagnostic when the loss goes non-finite.
TrainResult train(const SparseTensor3& x, const SparseTensor3& yu, const SparseTensor3& yi,
                  const PairOrderSet& pairs, const TrainConfig& cfg);

// Relative normalized BPR weight: lambda_b * n_s_bpr * t_iter / (m * n^2).
double relative_bpr_weight(const TrainConfig& cfg, int m, int n);

}  // namespace mter
