#pragma once

#include <cstdint>

#include "mter/tensor.hpp"

namespace mter {

// Latent dimensions per entity type: users (a), items (b), features (c),
// opinion phrases (d).
struct Dims {
  int a = 8;
  int b = 8;
  int c = 6;
  int d = 6;
};

// Non-negative factor matrices and core tensors. The feature matrix stores
// p + 1 rows: rows 0..p-1 are real features, row p is the dummy feature whose
// reconstruction slice carries the overall rating.
struct FactorModel {
  Matrix user_factors;     // m x a
  Matrix item_factors;     // n x b
  Matrix feature_factors;  // (p + 1) x c, row p is the dummy feature
  Matrix opinion_factors;  // q x d
  Tensor3 core_x;          // a x b x c
  Tensor3 core_yu;         // a x c x d
  Tensor3 core_yi;         // b x c x d

  int m() const { return static_cast<int>(user_factors.rows()); }
  int n() const { return static_cast<int>(item_factors.rows()); }
  int p() const { return static_cast<int>(feature_factors.rows()) - 1; }
  int q() const { return static_cast<int>(opinion_factors.rows()); }
  Dims dims() const {
    return {static_cast<int>(user_factors.cols()), static_cast<int>(item_factors.cols()),
            static_cast<int>(feature_factors.cols()), static_cast<int>(opinion_factors.cols())};
  }
};

// Strictly positive uniform (0, scale] initialization, deterministic per seed.
FactorModel init_model(const Dims& dims, int m, int n, int p, int q, std::uint64_t seed,
                       double scale = 0.1);

// Predicted affinity among user i, item j and feature k (k == p selects the
// dummy overall-rating feature).
double predict_x(const FactorModel& model, int i, int j, int k);

// Predicted overall rating, i.e. the dummy-feature slice.
double predict_overall(const FactorModel& model, int i, int j);

// Predicted user-side / item-side phrase affinities; k must be a real feature.
double predict_yu(const FactorModel& model, int i, int k, int w);
double predict_yi(const FactorModel& model, int j, int k, int w);

// Opinion phrase score: product of the user-side and item-side predictions.
double opinion_score(const FactorModel& model, int i, int j, int k, int w);

}  // namespace mter
