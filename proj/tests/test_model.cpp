#include <doctest.h>

#include <random>

#include "mter/model.hpp"
#include "oracles.hpp"

using namespace mter;

namespace {

FactorModel random_model(std::uint64_t seed, Dims dims = {3, 4, 2, 3}, int m = 4, int n = 5,
                         int p = 3, int q = 4) {
  return init_model(dims, m, n, p, q, seed, 0.5);
}

}  // namespace

TEST_CASE("init_model is deterministic per seed") {
  auto m1 = random_model(11);
  auto m2 = random_model(11);
  CHECK(m1.user_factors.data() == m2.user_factors.data());
  CHECK(m1.core_yi.data() == m2.core_yi.data());
  auto m3 = random_model(12);
  CHECK(m1.user_factors.data() != m3.user_factors.data());
}

TEST_CASE("init_model range and shape") {
  auto model = init_model({3, 2, 2, 2}, 2, 3, 4, 5, 1, 0.1);
  CHECK(model.user_factors.rows() == 2);
  CHECK(model.user_factors.cols() == 3);
  CHECK(model.feature_factors.rows() == 5);  // p + 1
  for (double v : model.user_factors.data()) {
    CHECK(v > 0.0);
    CHECK(v <= 0.1);
  }
  for (double v : model.core_x.data()) {
    CHECK(v > 0.0);
    CHECK(v <= 0.1);
  }
}

TEST_CASE("init_model rejects zero dimensions") {
  CHECK_THROWS_AS(init_model({0, 2, 2, 2}, 2, 2, 2, 2, 1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(init_model({2, 2, 2, 2}, 2, 2, 2, 2, 1, 0.0), std::invalid_argument);
}

TEST_CASE("mode_product with identity returns the core") {
  Tensor3 core(2, 3, 4);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0, 1);
  for (double& v : core.data()) v = dist(rng);

  Matrix eye(3, 3);
  for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
  auto out = mode_product(core, eye, 2);
  for (std::size_t i = 0; i < core.size(); ++i)
    CHECK(out.data()[i] == doctest::Approx(core.data()[i]).epsilon(1e-15));
}

TEST_CASE("mode_product sums fibers") {
  Tensor3 core(2, 2, 2, 1.0);
  Matrix ones(1, 2, 1.0);
  auto out = mode_product(core, ones, 1);
  CHECK(out.dim1() == 1);
  for (double v : out.data()) CHECK(v == doctest::Approx(2.0));
}

TEST_CASE("mode_product rejects shape mismatch") {
  Tensor3 core(2, 3, 4);
  Matrix bad(2, 5);
  CHECK_THROWS_AS(mode_product(core, bad, 1), std::invalid_argument);
  CHECK_THROWS_AS(mode_product(core, bad, 4), std::invalid_argument);
}

TEST_CASE("chained mode products equal the brute-force triple sum") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor3 core(2, 3, 4);
    for (double& v : core.data()) v = dist(rng);
    Matrix a(1, 2), b(1, 3), c(1, 4);
    for (double& v : a.data()) v = dist(rng);
    for (double& v : b.data()) v = dist(rng);
    for (double& v : c.data()) v = dist(rng);

    auto chained = mode_product(mode_product(mode_product(core, a, 1), b, 2), c, 3);
    REQUIRE(chained.size() == 1);

    const double expect = oracle::triple_sum(core, a.data(), b.data(), c.data());
    CHECK(chained.data()[0] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("predict_x rank-1 value") {
  FactorModel model;
  model.user_factors = Matrix(1, 1, 0.5);
  model.item_factors = Matrix(1, 1, 1.0);
  model.feature_factors = Matrix(2, 1, 3.0);
  model.opinion_factors = Matrix(1, 1, 1.0);
  model.core_x = Tensor3(1, 1, 1, 2.0);
  model.core_yu = Tensor3(1, 1, 1, 1.0);
  model.core_yi = Tensor3(1, 1, 1, 1.0);
  CHECK(predict_x(model, 0, 0, 0) == doctest::Approx(3.0));
  CHECK(predict_overall(model, 0, 0) == doctest::Approx(3.0));
}

TEST_CASE("zero factor row annihilates the prediction") {
  auto model = random_model(3);
  for (double& v : model.user_factors.row(1)) v = 0.0;
  CHECK(predict_x(model, 1, 0, 0) == 0.0);
  CHECK(predict_yu(model, 1, 0, 0) == 0.0);
}

TEST_CASE("predict_* agree with triple-loop oracle") {
  for (int trial = 0; trial < 20; ++trial) {
    auto model = random_model(100 + trial);
    for (int i = 0; i < model.m(); ++i)
      for (int j = 0; j < model.n(); ++j)
        for (int k = 0; k <= model.p(); ++k)
          CHECK(predict_x(model, i, j, k) ==
                doctest::Approx(oracle::predict_x(model, i, j, k)).epsilon(1e-12));
    for (int i = 0; i < model.m(); ++i)
      for (int k = 0; k < model.p(); ++k)
        for (int w = 0; w < model.q(); ++w) {
          CHECK(predict_yu(model, i, k, w) ==
                doctest::Approx(oracle::predict_yu(model, i, k, w)).epsilon(1e-12));
          CHECK(opinion_score(model, i, 0, k, w) ==
                doctest::Approx(oracle::predict_yu(model, i, k, w) *
                                oracle::predict_yi(model, 0, k, w))
                    .epsilon(1e-12));
        }
  }
}

TEST_CASE("predict_overall equals predict_x at the dummy index") {
  for (int trial = 0; trial < 100; ++trial) {
    auto model = random_model(trial);
    CHECK(predict_overall(model, 0, 0) == predict_x(model, 0, 0, model.p()));
  }
}

TEST_CASE("predict_yu/yi reject the dummy feature") {
  auto model = random_model(5);
  CHECK_THROWS_AS(predict_yu(model, 0, model.p(), 0), std::domain_error);
  CHECK_THROWS_AS(predict_yi(model, 0, model.p(), 0), std::domain_error);
  CHECK_THROWS_AS(opinion_score(model, 0, 0, model.p(), 0), std::domain_error);
}

TEST_CASE("index range errors") {
  auto model = random_model(6);
  CHECK_THROWS_AS(predict_x(model, model.m(), 0, 0), std::out_of_range);
  CHECK_THROWS_AS(predict_x(model, 0, 0, model.p() + 1), std::out_of_range);
}

TEST_CASE("predictions are non-negative for non-negative models") {
  for (int trial = 0; trial < 50; ++trial) {
    auto model = random_model(trial);
    CHECK(predict_x(model, 0, 1, 2) >= 0.0);
    CHECK(predict_yu(model, 1, 1, 1) >= 0.0);
  }
}

TEST_CASE("predict_x is linear in each factor row") {
  auto model = random_model(9);
  const double base = predict_x(model, 2, 3, 1);
  for (double& v : model.user_factors.row(2)) v *= 2.0;
  CHECK(predict_x(model, 2, 3, 1) == doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("opinion_score is the product of its components") {
  FactorModel model;
  model.user_factors = Matrix(1, 1, 2.0);
  model.item_factors = Matrix(1, 1, 3.0);
  model.feature_factors = Matrix(2, 1, 1.0);
  model.opinion_factors = Matrix(1, 1, 1.0);
  model.core_x = Tensor3(1, 1, 1, 1.0);
  model.core_yu = Tensor3(1, 1, 1, 1.0);
  model.core_yi = Tensor3(1, 1, 1, 1.0);
  CHECK(predict_yu(model, 0, 0, 0) == doctest::Approx(2.0));
  CHECK(predict_yi(model, 0, 0, 0) == doctest::Approx(3.0));
  CHECK(opinion_score(model, 0, 0, 0, 0) == doctest::Approx(6.0));
}
