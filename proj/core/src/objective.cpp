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

#include "qsgd/objective.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "qsgd/errors.hpp"

namespace qsgd {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_matrix(const std::vector<double>& a, std::size_t m, std::size_t n) {
  return {a.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)};
}

void check_shape(std::size_t m, std::size_t n, const std::vector<double>& a) {
  if (m == 0 || n == 0) throw ConfigError("objective needs m >= 1 and n >= 1", "m");
  if (a.size() != m * n) throw ConfigError("design matrix must have m*n entries", "data");
  require_finite(a, "design matrix");
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kLeastSquares: return "least_squares";
    case ObjectiveKind::kLogisticRegression: return "logistic";
    case ObjectiveKind::kNonconvexTest: return "nonconvex";
  }
  return "unknown";
}

Objective Objective::least_squares(std::size_t m, std::size_t n, std::vector<double> a,
                                   std::vector<double> b, double lambda) {
  check_shape(m, n, a);
  if (b.size() != m) throw ConfigError("least squares needs m targets", "data");
  require_finite(b, "targets");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0", "lambda");
  Objective obj;
  obj.kind_ = ObjectiveKind::kLeastSquares;
  obj.m_ = m;
  obj.n_ = n;
  obj.a_ = std::move(a);
  obj.b_ = std::move(b);
  obj.lambda_ = lambda;
  obj.compute_constants();
  return obj;
}

Objective Objective::logistic(std::size_t m, std::size_t n, std::vector<double> a,
                              std::vector<double> b, double lambda) {
  check_shape(m, n, a);
  if (b.size() != m) throw ConfigError("logistic regression needs m labels", "data");
  for (double y : b) {
    if (y != 1.0 && y != -1.0) throw ConfigError("logistic labels must be -1 or +1", "data");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0", "lambda");
  Objective obj;
  obj.kind_ = ObjectiveKind::kLogisticRegression;
  obj.m_ = m;
  obj.n_ = n;
  obj.a_ = std::move(a);
  obj.b_ = std::move(b);
  obj.lambda_ = lambda;
  obj.compute_constants();
  return obj;
}

Objective Objective::nonconvex(std::size_t m, std::size_t n, std::vector<double> coeffs) {
  check_shape(m, n, coeffs);
  for (double c : coeffs) {
    if (c < 0.0) throw ConfigError("non-convex curvature coefficients must be >= 0", "data");
  }
  Objective obj;
  obj.kind_ = ObjectiveKind::kNonconvexTest;
  obj.m_ = m;
  obj.n_ = n;
  obj.a_ = std::move(coeffs);
  obj.compute_constants();
  return obj;
}

void Objective::compute_constants() {
  const auto A = as_matrix(a_, m_, n_);
  const double inv_m = 1.0 / static_cast<double>(m_);
  switch (kind_) {
    case ObjectiveKind::kLeastSquares:
    case ObjectiveKind::kLogisticRegression: {
      const double curvature = kind_ == ObjectiveKind::kLeastSquares ? 1.0 : 0.25;
      Eigen::MatrixXd gram = curvature * inv_m * (A.transpose() * A);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
      smoothness_ = eig.eigenvalues().maxCoeff() + lambda_;
      component_smoothness_ = curvature * A.rowwise().squaredNorm().maxCoeff() + lambda_;
      if (kind_ == ObjectiveKind::kLeastSquares) {
        strong_convexity_ = std::max(0.0, eig.eigenvalues().minCoeff()) + lambda_;
        if (strong_convexity_ > 1e-12 * smoothness_) {
          Eigen::MatrixXd h = inv_m * (A.transpose() * A);
          h.diagonal().array() += lambda_;
          const Eigen::Map<const Eigen::VectorXd> b(b_.data(), static_cast<Eigen::Index>(m_));
          const Eigen::VectorXd rhs = inv_m * (A.transpose() * b);
          const Eigen::VectorXd x = h.ldlt().solve(rhs);
          optimum_ = DenseVector(x.data(), x.data() + x.size());
        }
      } else {
        strong_convexity_ = lambda_;
        if (lambda_ > 0.0) {
          // Newton's method; converges in a handful of steps for lambda > 0.
          Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
          for (int iter = 0; iter < 100; ++iter) {
            Eigen::VectorXd g = lambda_ * x;
            Eigen::MatrixXd h = lambda_ * Eigen::MatrixXd::Identity(x.size(), x.size());
            for (std::size_t i = 0; i < m_; ++i) {
              const auto row = A.row(static_cast<Eigen::Index>(i));
              const double y = b_[i];
              const double p = sigmoid(-y * row.dot(x));
              g += (-y * p * inv_m) * row.transpose();
              h += (p * (1.0 - p) * inv_m) * (row.transpose() * row);
            }
            const Eigen::VectorXd step = h.ldlt().solve(g);
            x -= step;
            if (step.norm() <= 1e-14 * (1.0 + x.norm())) break;
          }
          optimum_ = DenseVector(x.data(), x.data() + x.size());
        }
      }
      break;
    }
    case ObjectiveKind::kNonconvexTest: {
      // d^2/dx^2 (c x^2 + cos(3x)/2) = 2c - 4.5 cos(3x) <= 2c + 4.5.
      smoothness_ = 2.0 * (inv_m * A.colwise().sum()).maxCoeff() + 4.5;
      component_smoothness_ = 2.0 * A.maxCoeff() + 4.5;
      strong_convexity_ = 0.0;
      break;
    }
  }
}

void Objective::check_index(std::size_t i) const {
  if (i >= m_) {
    throw DomainError("component index " + std::to_string(i) + " out of range [0, " +
                      std::to_string(m_) + ")");
  }
}

double Objective::component_value(std::size_t i, std::span<const double> x) const {
  check_index(i);
  if (x.size() != n_) throw DomainError("objective: x has the wrong dimension");
  const auto a = row(i);
  switch (kind_) {
    case ObjectiveKind::kLeastSquares: {
      const double r = dot(a, x) - b_[i];
      return 0.5 * r * r + 0.5 * lambda_ * squared_norm(x);
    }
    case ObjectiveKind::kLogisticRegression:
      return softplus(-b_[i] * dot(a, x)) + 0.5 * lambda_ * squared_norm(x);
    case ObjectiveKind::kNonconvexTest: {
      double sum = 0.0;
      for (std::size_t k = 0; k < n_; ++k) sum += a[k] * x[k] * x[k] + 0.5 * std::cos(3.0 * x[k]);
      return sum;
    }
  }
  return 0.0;
}

double Objective::value(std::span<const double> x) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < m_; ++i) sum += component_value(i, x);
  return sum / static_cast<double>(m_);
}

void Objective::add_component_gradient(std::size_t i, std::span<const double> x, double scale,
                                       std::span<double> out) const {
  check_index(i);
  if (x.size() != n_ || out.size() != n_) {
    throw DomainError("objective: gradient buffers have the wrong dimension");
  }
  const auto a = row(i);
  switch (kind_) {
    case ObjectiveKind::kLeastSquares:
    case ObjectiveKind::kLogisticRegression: {
      double coef = 0.0;
      if (kind_ == ObjectiveKind::kLeastSquares) {
        coef = dot(a, x) - b_[i];
      } else {
        coef = -b_[i] * sigmoid(-b_[i] * dot(a, x));
      }
      for (std::size_t k = 0; k < n_; ++k) out[k] += scale * (coef * a[k] + lambda_ * x[k]);
      break;
    }
    case ObjectiveKind::kNonconvexTest:
      for (std::size_t k = 0; k < n_; ++k) {
        out[k] += scale * (2.0 * a[k] * x[k] - 1.5 * std::sin(3.0 * x[k]));
      }
      break;
  }
}

void Objective::component_gradient(std::size_t i, std::span<const double> x,
                                   std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  add_component_gradient(i, x, 1.0, out);
}

DenseVector Objective::partial_gradient(std::size_t begin, std::size_t end,
                                        std::span<const double> x) const {
  if (begin > end || end > m_) throw DomainError("partial_gradient: bad component range");
  DenseVector g(n_, 0.0);
  for (std::size_t i = begin; i < end; ++i) add_component_gradient(i, x, 1.0, g);
  const double inv_m = 1.0 / static_cast<double>(m_);
  for (double& v : g) v *= inv_m;
  return g;
}

DenseVector Objective::gradient(std::span<const double> x) const {
  return partial_gradient(0, m_, x);
}

std::optional<double> Objective::optimal_value() const {
  if (!optimum_) return std::nullopt;
  return value(*optimum_);
}

double estimate_second_moment(const Objective& obj, std::span<const double> x, Rng rng,
                              std::size_t samples) {
  DenseVector g(obj.dim());
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    obj.component_gradient(rng.index(obj.num_components()), x, g);
    best = std::max(best, squared_norm(g));
  }
  return best;
}

DenseVector finite_difference_gradient(const Objective& obj, std::span<const double> x,
                                       double h) {
  DenseVector probe(x.begin(), x.end());
  DenseVector g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double saved = probe[k];
    probe[k] = saved + h;
    const double up = obj.value(probe);
    probe[k] = saved - h;
    const double down = obj.value(probe);
    probe[k] = saved;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace qsgd
