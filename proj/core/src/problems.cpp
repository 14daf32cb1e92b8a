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

#include "qsgd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qsgd/errors.hpp"

namespace qsgd {
namespace {

std::vector<double> gaussian_matrix(std::size_t m, std::size_t n, double stddev, Rng& rng) {
  std::vector<double> a(m * n);
  for (double& v : a) v = stddev * rng.normal();
  return a;
}

std::vector<double> linear_targets(const std::vector<double>& a, std::size_t m, std::size_t n,
                                   double noise, Rng& rng) {
  std::vector<double> x_true(n);
  for (double& v : x_true) v = rng.normal();
  std::vector<double> b(m);
  for (std::size_t i = 0; i < m; ++i) {
    b[i] = dot(std::span<const double>(a).subspan(i * n, n), x_true) + noise * rng.normal();
  }
  return b;
}

}  // namespace

Objective make_least_squares(std::size_t m, std::size_t n, std::uint64_t seed, double noise,
                             double lambda) {
  if (m == 0 || n == 0) throw ConfigError("problem size must be positive", "n");
  Rng rng = substream(Rng(seed), Stream::kData);
  auto a = gaussian_matrix(m, n, 1.0 / std::sqrt(static_cast<double>(n)), rng);
  auto b = linear_targets(a, m, n, noise, rng);
  return Objective::least_squares(m, n, std::move(a), std::move(b), lambda);
}

Objective make_ridge(std::size_t m, std::size_t n, double kappa, std::uint64_t seed,
                     double noise) {
  if (!(kappa > 1.0)) throw ConfigError("kappa must be > 1", "kappa");
  const Objective base = make_least_squares(m, n, seed, noise, 0.0);
  const double top = base.component_smoothness();
  const double bottom = base.strong_convexity();
  const double lambda = (top - kappa * bottom) / (kappa - 1.0);
  if (lambda < 0.0) {
    throw ConfigError("kappa is below the unregularized condition number of the data", "kappa");
  }
  std::vector<double> a(base.design().begin(), base.design().end());
  std::vector<double> b(base.targets().begin(), base.targets().end());
  return Objective::least_squares(m, n, std::move(a), std::move(b), lambda);
}

Objective make_diagonal_quadratic(std::span<const double> coeffs) {
  const std::size_t n = coeffs.size();
  if (n == 0) throw ConfigError("quadratic needs at least one coefficient", "n");
  std::vector<double> a(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(coeffs[k] >= 0.0)) throw ConfigError("quadratic coefficients must be >= 0", "kappa");
    a[k * n + k] = std::sqrt(static_cast<double>(n) * coeffs[k]);
  }
  return Objective::least_squares(n, n, std::move(a), std::vector<double>(n, 0.0), 0.0);
}

Objective make_conditioned_quadratic(std::size_t n, double kappa) {
  if (n == 0) throw ConfigError("n must be >= 1", "n");
  if (!(kappa >= 1.0)) throw ConfigError("kappa must be >= 1", "kappa");
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) {
    c[k] = n == 1 ? 1.0 : 1.0 + (kappa - 1.0) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return make_diagonal_quadratic(c);
}

Objective make_logistic(std::size_t m, std::size_t n, std::uint64_t seed, double lambda) {
  if (m == 0 || n == 0) throw ConfigError("problem size must be positive", "n");
  Rng rng = substream(Rng(seed), Stream::kData);
  auto a = gaussian_matrix(m, n, 1.0, rng);
  std::vector<double> w(n);
  for (double& v : w) v = rng.normal() / std::sqrt(static_cast<double>(n));
  std::vector<double> b(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double margin = dot(std::span<const double>(a).subspan(i * n, n), w);
    b[i] = margin >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform() < 0.1) b[i] = -b[i];
  }
  return Objective::logistic(m, n, std::move(a), std::move(b), lambda);
}

Objective make_nonconvex(std::size_t m, std::size_t n, std::uint64_t seed, double spread) {
  if (m == 0 || n == 0) throw ConfigError("problem size must be positive", "n");
  if (!(spread >= 0.0 && spread <= 0.5)) throw ConfigError("spread must be in [0, 0.5]", "spread");
  Rng rng = substream(Rng(seed), Stream::kData);
  std::vector<double> e(m * n);
  for (double& v : e) v = std::clamp(spread * rng.normal(), -spread, spread);
  for (std::size_t k = 0; k < n; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += e[i * n + k];
    mean /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) e[i * n + k] -= mean;
  }
  for (double& v : e) v += 1.0;
  return Objective::nonconvex(m, n, std::move(e));
}

}  // namespace qsgd
