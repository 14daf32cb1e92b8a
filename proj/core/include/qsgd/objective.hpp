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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qsgd/rng.hpp"
#include "qsgd/vector_ops.hpp"

namespace qsgd {

enum class ObjectiveKind : std::uint8_t { kLeastSquares, kLogisticRegression, kNonconvexTest };

std::string_view to_string(ObjectiveKind kind);

/// Finite sum f(x) = (1/m) sum_i f_i(x) over m data rows.
///
///   least squares:  f_i(x) = 1/2 (a_i.x - b_i)^2 + lambda/2 |x|^2
///   logistic:       f_i(x) = log(1 + exp(-b_i a_i.x)) + lambda/2 |x|^2,  b_i in {-1, +1}
///   non-convex:     f_i(x) = sum_k (a_ik x_k^2 + 1/2 cos(3 x_k))
///
/// The design matrix is stored row-major. Constants L, l and the optimum are
/// computed once at construction.
class Objective {
 public:
  static Objective least_squares(std::size_t m, std::size_t n, std::vector<double> a,
                                 std::vector<double> b, double lambda = 0.0);
  static Objective logistic(std::size_t m, std::size_t n, std::vector<double> a,
                            std::vector<double> b, double lambda = 0.0);
  /// `coeffs` holds the m x n curvature coefficients a_ik; each must be >= 0.
  static Objective nonconvex(std::size_t m, std::size_t n, std::vector<double> coeffs);

  ObjectiveKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return n_; }
  std::size_t num_components() const noexcept { return m_; }
  double lambda() const noexcept { return lambda_; }

  double value(std::span<const double> x) const;
  double component_value(std::size_t i, std::span<const double> x) const;

  /// out = grad f_i(x). `out` must have dim() entries.
  void component_gradient(std::size_t i, std::span<const double> x, std::span<double> out) const;

  /// out += scale * grad f_i(x).
  void add_component_gradient(std::size_t i, std::span<const double> x, double scale,
                              std::span<double> out) const;

  /// (1/m) sum_{i in [begin, end)} grad f_i(x), accumulated in index order.
  DenseVector partial_gradient(std::size_t begin, std::size_t end,
                               std::span<const double> x) const;

  /// Same as partial_gradient(0, m, x).
  DenseVector gradient(std::span<const double> x) const;

  /// Smoothness of f.
  double smoothness() const noexcept { return smoothness_; }
  /// max_i smoothness of f_i.
  double component_smoothness() const noexcept { return component_smoothness_; }
  /// Strong-convexity modulus of f; 0 when f is not strongly convex.
  double strong_convexity() const noexcept { return strong_convexity_; }

  /// Minimizer when it is known (convex objectives with a unique solution).
  const std::optional<DenseVector>& optimum() const noexcept { return optimum_; }
  /// f(optimum()), or nullopt.
  std::optional<double> optimal_value() const;

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(a_).subspan(i * n_, n_);
  }
  std::span<const double> design() const noexcept { return a_; }
  std::span<const double> targets() const noexcept { return b_; }

 private:
  Objective() = default;
  void check_index(std::size_t i) const;
  void compute_constants();

  ObjectiveKind kind_ = ObjectiveKind::kLeastSquares;
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::vector<double> a_;
  std::vector<double> b_;
  double lambda_ = 0.0;
  double smoothness_ = 0.0;
  double component_smoothness_ = 0.0;
  double strong_convexity_ = 0.0;
  std::optional<DenseVector> optimum_;
};

/// max over `samples` uniformly drawn components of |grad f_i(x)|^2: an
/// empirical second-moment bound B for single-sample stochastic gradients.
double estimate_second_moment(const Objective& obj, std::span<const double> x, Rng rng,
                              std::size_t samples = 1000);

/// Central finite-difference gradient of f, for validation.
DenseVector finite_difference_gradient(const Objective& obj, std::span<const double> x,
                                       double h = 1e-6);

}  // namespace qsgd
