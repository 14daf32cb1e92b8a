// Copyright 2026 The QSGD Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qsgd/errors.hpp"
#include "qsgd/objective.hpp"
#include "qsgd/problems.hpp"
#include "qsgd/rng.hpp"
#include "qsgd/vector_ops.hpp"

namespace qsgd {
namespace {

std::vector<double> random_point(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = scale * rng.normal();
  return x;
}

void expect_gradient_matches_finite_differences(const Objective& obj, std::uint64_t seed) {
  const auto x = random_point(obj.dim(), seed, 0.5);
  const auto g = obj.gradient(x);
  const auto fd = finite_difference_gradient(obj, x);
  for (std::size_t k = 0; k < obj.dim(); ++k) {
    EXPECT_NEAR(g[k], fd[k], 1e-5 * (1.0 + std::abs(g[k]))) << to_string(obj.kind()) << " " << k;
  }
}

TEST(Objective, GradientsMatchFiniteDifferences) {
  expect_gradient_matches_finite_differences(make_least_squares(50, 8, 1, 0.1, 0.3), 2);
  expect_gradient_matches_finite_differences(make_logistic(60, 6, 3), 4);
  expect_gradient_matches_finite_differences(make_nonconvex(40, 5, 5), 6);
  expect_gradient_matches_finite_differences(make_ridge(64, 10, 20.0, 7), 8);
}

TEST(Objective, PartialGradientsSumToFullGradient) {
  const auto obj = make_least_squares(40, 6, 9);
  const auto x = random_point(6, 10);
  auto sum = obj.partial_gradient(0, 13, x);
  const auto rest = obj.partial_gradient(13, 40, x);
  const auto full = obj.gradient(x);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(sum[k] + rest[k], full[k], 1e-12);
}

TEST(Objective, ComponentGradientsAverageToGradient) {
  const auto obj = make_logistic(30, 4, 11);
  const auto x = random_point(4, 12);
  std::vector<double> acc(4, 0.0);
  for (std::size_t i = 0; i < 30; ++i) obj.add_component_gradient(i, x, 1.0 / 30.0, acc);
  const auto full = obj.gradient(x);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(acc[k], full[k], 1e-12);
}

TEST(Objective, OptimumHasVanishingGradient) {
  for (const auto& obj : {make_least_squares(80, 10, 13), make_ridge(80, 10, 50.0, 14),
                          make_logistic(120, 5, 15, 0.05)}) {
    ASSERT_TRUE(obj.optimum().has_value());
    EXPECT_LT(norm2(obj.gradient(*obj.optimum())), 1e-9) << to_string(obj.kind());
    const auto nearby = random_point(obj.dim(), 16, 0.01);
    std::vector<double> x = *obj.optimum();
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += nearby[k];
    EXPECT_GE(obj.value(x), *obj.optimal_value());
  }
}

TEST(Objective, RidgeHitsRequestedConditionNumber) {
  for (double kappa : {2.0, 10.0, 100.0}) {
    const auto obj = make_ridge(256, 32, kappa, 17);
    EXPECT_NEAR(obj.component_smoothness() / obj.strong_convexity(), kappa, 1e-9 * kappa);
    EXPECT_GT(obj.lambda(), 0.0);
    EXPECT_LE(obj.smoothness(), obj.component_smoothness());
  }
}

TEST(Objective, DiagonalQuadraticConstants) {
  const auto obj = make_conditioned_quadratic(16, 10.0);
  EXPECT_NEAR(obj.smoothness(), 10.0, 1e-9);
  EXPECT_NEAR(obj.strong_convexity(), 1.0, 1e-9);
  const std::vector<double> x(16, 1.0);
  double expected = 0.0;
  for (std::size_t k = 0; k < 16; ++k) expected += 0.5 * (1.0 + 9.0 * k / 15.0);
  EXPECT_NEAR(obj.value(x), expected, 1e-9);
  EXPECT_NEAR(*obj.optimal_value(), 0.0, 1e-12);
}

TEST(Objective, NonconvexConstants) {
  const auto obj = make_nonconvex(100, 8, 18);
  EXPECT_EQ(obj.strong_convexity(), 0.0);
  EXPECT_FALSE(obj.optimum().has_value());
  // Columns average to one, so f(x) = sum_k (x_k^2 + cos(3 x_k)/2).
  const auto x = random_point(8, 19);
  double expected = 0.0;
  for (double v : x) expected += v * v + 0.5 * std::cos(3.0 * v);
  EXPECT_NEAR(obj.value(x), expected, 1e-9);
  EXPECT_LE(obj.smoothness(), obj.component_smoothness());
  EXPECT_GE(obj.smoothness(), 2.0 + 4.5);
}

TEST(Objective, SmoothnessBoundsCurvature) {
  const auto obj = make_least_squares(60, 5, 20, 0.1, 0.2);
  const auto x = random_point(5, 21);
  const auto y = random_point(5, 22);
  const auto gx = obj.gradient(x);
  const auto gy = obj.gradient(y);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    num += (gx[k] - gy[k]) * (gx[k] - gy[k]);
    den += (x[k] - y[k]) * (x[k] - y[k]);
  }
  const double ratio = std::sqrt(num / den);
  EXPECT_LE(ratio, obj.smoothness() * (1 + 1e-9));
  EXPECT_GE(ratio, obj.strong_convexity() * (1 - 1e-9));
}

TEST(Objective, SecondMomentEstimate) {
  const auto obj = make_least_squares(200, 6, 23);
  const std::vector<double> x(6, 0.0);
  double exact = 0.0;
  for (std::size_t i = 0; i < 200; ++i) {
    std::vector<double> g(6, 0.0);
    obj.component_gradient(i, x, g);
    exact = std::max(exact, squared_norm(g));
  }
  // With 100 draws per component every component is seen.
  EXPECT_EQ(estimate_second_moment(obj, x, Rng(24), 20000), exact);
  EXPECT_LE(estimate_second_moment(obj, x, Rng(25), 10), exact);
}

TEST(Objective, RejectsBadInput) {
  EXPECT_THROW(Objective::least_squares(2, 2, {1.0, 2.0, 3.0}, {1.0, 2.0}), Error);
  const auto obj = make_least_squares(10, 3, 25);
  EXPECT_THROW(obj.value(std::vector<double>(2, 0.0)), DomainError);
  std::vector<double> g(3);
  EXPECT_THROW(obj.component_gradient(10, std::vector<double>(3, 0.0), g), Error);
}

}  // namespace
}  // namespace qsgd
