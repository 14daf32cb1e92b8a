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

// Quantized SVRG over K workers holding contiguous blocks of m/K components.
//
// Epoch p starts from the snapshot y. Worker k sends grad h_k(y), with
// h_k = (1/m) sum of its components, and everyone forms mu = sum_k grad h_k(y).
// Then for t = 1..T each worker samples j uniformly from all m components and
// sends Q(grad f_j(x_t) - grad f_j(y) + mu); x_{t+1} = x_t - eta * mean of the
// K decoded messages. The next snapshot is the mean of x_1..x_T, x_1 = y.
//
// Randomness (seed = SvrgConfig::seed):
//   j draws           Rng(seed).split(kSample).split(p).split(t), one index per worker in order
//   update quantizer  Rng(seed).split(kQuantize).split(p).split(t).split(k)
//   snapshot quantizer Rng(seed).split(kFullGradient).split(p).split(k)

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qsgd/objective.hpp"
#include "qsgd/quantizer.hpp"
#include "qsgd/simsgd.hpp"

namespace qsgd {

struct SvrgConfig {
  std::size_t workers = 1;
  std::size_t epochs = 10;
  std::size_t iterations = 0;  // per epoch; 0 = ceil(20 L / l)
  double eta = 0.0;            // 0 = 0.1 / L
  bool quantize = true;
  bool full_gradient_quantized = false;
  std::uint32_t levels = 0;       // 0 = ceil(sqrt(n))
  std::uint32_t bucket_size = 0;  // 0 = n
  NormMode norm = NormMode::kL2;
  Scheme scheme = Scheme::kDense;
  std::uint64_t seed = 0;
  std::optional<DenseVector> x0;  // default: zeros
  std::size_t threads = 0;        // 0 = QSGD_THREADS or 1

  /// Throws ConfigError naming the offending key. L here is the component
  /// smoothness of the objective.
  void validate(const Objective& obj) const;

  std::size_t resolved_iterations(const Objective& obj) const;
  double resolved_eta(const Objective& obj) const;
  QuantizerConfig resolved_quantizer(const Objective& obj) const;
};

struct EpochRecord {
  std::size_t epoch = 0;          // 0 is the starting point
  double value = 0.0;             // f(y)
  double suboptimality = 0.0;     // f(y) - f*
  std::vector<std::uint64_t> worker_bits;  // bits sent by each worker during the epoch
  std::uint64_t max_worker_bits = 0;
  WallClock wall;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct SvrgMetrics {
  std::vector<EpochRecord> epochs;
  std::size_t iterations = 0;
  double eta = 0.0;
  std::uint32_t levels = 0;
  double optimal_value = 0.0;
  std::uint64_t total_bits = 0;
  DenseVector y;

  friend bool operator==(const SvrgMetrics&, const SvrgMetrics&) = default;
};

/// (32 + 2.8 n)(T + 1) + 32 n.
double qsvrg_epoch_bit_budget(std::size_t n, std::size_t iterations);

/// One worker's message grad f_j(x) - grad f_j(y) + mu, quantized and sent
/// through the codec when `quantizer` is set. `bits` receives the message
/// length.
DenseVector qsvrg_worker_update(const Objective& obj, std::span<const double> x,
                                std::span<const double> y, std::span<const double> mu,
                                std::size_t j, const std::optional<QuantizerConfig>& quantizer,
                                const Rng& rng, std::uint64_t* bits = nullptr);

SvrgMetrics run_qsvrg(const Objective& obj, const SvrgConfig& cfg);

}  // namespace qsgd
