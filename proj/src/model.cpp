#include "mter/model.hpp"

#include <random>
#include <stdexcept>

namespace mter {

namespace {

void fill_positive(std::vector<double>& data, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> dist(0.0, scale);
  for (double& v : data) v = scale - dist(rng);  // (0, scale]
}

// sum_{r,t,v} core[r][t][v] * x[r] * y[t] * z[v]
double contract3(const Tensor3& core, std::span<const double> x, std::span<const double> y,
                 std::span<const double> z) {
  double total = 0.0;
  for (std::size_t r = 0; r < core.dim1(); ++r) {
    double sr = 0.0;
    for (std::size_t t = 0; t < core.dim2(); ++t) {
      double st = 0.0;
      for (std::size_t v = 0; v < core.dim3(); ++v) st += core(r, t, v) * z[v];
      sr += st * y[t];
    }
    total += sr * x[r];
  }
  return total;
}

}  // namespace

FactorModel init_model(const Dims& dims, int m, int n, int p, int q, std::uint64_t seed,
                       double scale) {
  if (dims.a < 1 || dims.b < 1 || dims.c < 1 || dims.d < 1)
    throw std::invalid_argument("latent dimensions must be >= 1");
  if (m < 1 || n < 1 || p < 1 || q < 1)
    throw std::invalid_argument("entity counts must be >= 1");
  if (scale <= 0.0) throw std::invalid_argument("init scale must be > 0");

  FactorModel model;
  model.user_factors = Matrix(m, dims.a);
  model.item_factors = Matrix(n, dims.b);
  model.feature_factors = Matrix(p + 1, dims.c);
  model.opinion_factors = Matrix(q, dims.d);
  model.core_x = Tensor3(dims.a, dims.b, dims.c);
  model.core_yu = Tensor3(dims.a, dims.c, dims.d);
  model.core_yi = Tensor3(dims.b, dims.c, dims.d);

  std::mt19937_64 rng(seed);
  fill_positive(model.user_factors.data(), rng, scale);
  fill_positive(model.item_factors.data(), rng, scale);
  fill_positive(model.feature_factors.data(), rng, scale);
  fill_positive(model.opinion_factors.data(), rng, scale);
  fill_positive(model.core_x.data(), rng, scale);
  fill_positive(model.core_yu.data(), rng, scale);
  fill_positive(model.core_yi.data(), rng, scale);
  return model;
}

double predict_x(const FactorModel& model, int i, int j, int k) {
  if (i < 0 || i >= model.m() || j < 0 || j >= model.n() || k < 0 || k > model.p())
    throw std::out_of_range("predict_x: index out of range");
  return contract3(model.core_x, model.user_factors.row(i), model.item_factors.row(j),
                   model.feature_factors.row(k));
}

double predict_overall(const FactorModel& model, int i, int j) {
  return predict_x(model, i, j, model.p());
}

double predict_yu(const FactorModel& model, int i, int k, int w) {
  if (i < 0 || i >= model.m() || w < 0 || w >= model.q())
    throw std::out_of_range("predict_yu: index out of range");
  if (k < 0 || k >= model.p())
    throw std::domain_error("predict_yu: dummy feature has no opinion phrases");
  return contract3(model.core_yu, model.user_factors.row(i), model.feature_factors.row(k),
                   model.opinion_factors.row(w));
}

double predict_yi(const FactorModel& model, int j, int k, int w) {
  if (j < 0 || j >= model.n() || w < 0 || w >= model.q())
    throw std::out_of_range("predict_yi: index out of range");
  if (k < 0 || k >= model.p())
    throw std::domain_error("predict_yi: dummy feature has no opinion phrases");
  return contract3(model.core_yi, model.item_factors.row(j), model.feature_factors.row(k),
                   model.opinion_factors.row(w));
}

double opinion_score(const FactorModel& model, int i, int j, int k, int w) {
  return predict_yu(model, i, k, w) * predict_yi(model, j, k, w);
}

}  // namespace mter
