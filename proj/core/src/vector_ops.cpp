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

#include "qsgd/vector_ops.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "qsgd/errors.hpp"
#include "qsgd/rng.hpp"

namespace qsgd {

__extension__ using Wide = unsigned __int128;

std::size_t Rng::index(std::size_t n) noexcept {
  // Lemire's nearly-divisionless bounded draw.
  const std::uint64_t range = n;
  Wide m = static_cast<Wide>((*this)()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<Wide>((*this)()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

double Rng::normal() noexcept {
  std::normal_distribution<double> dist;
  return dist(*this);
}

void require_finite(std::span<const double> v, std::string_view what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw DomainError(std::string(what) + ": component " + std::to_string(i) +
                        " is not finite");
    }
  }
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm2(std::span<const double> v) {
  const double m = max_abs(v);
  if (m == 0.0 || !std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) {
    const double r = x / m;
    acc += r * r;
  }
  return m * std::sqrt(acc);
}

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

float round_up_to_float(double x) {
  if (!(x >= 0.0) || x > std::numeric_limits<float>::max()) {
    throw DomainError("scale " + std::to_string(x) +
                      " is outside the binary32 range");
  }
  float f = static_cast<float>(x);
  if (static_cast<double>(f) < x) {
    f = std::nextafter(f, std::numeric_limits<float>::infinity());
  }
  return f;
}

}  // namespace qsgd
