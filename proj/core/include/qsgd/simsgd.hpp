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

// In-process simulation of synchronous data-parallel SGD.
//
// Each iteration t every worker k computes a minibatch gradient at the shared
// iterate, optionally quantizes and encodes it, and "broadcasts" the message.
// All K messages are decoded and averaged in worker order and the shared
// iterate takes one step. Bits are counted from the encoded payloads.
//
// Randomness (seed = RunConfig::seed):
//   sample indices   Rng(seed).split(kSample).split(t), K*m_b draws, worker k
//                    takes draws [k*m_b, (k+1)*m_b)
//   quantization     Rng(seed).split(kQuantize).split(t).split(k)
//   stopping time    Rng(seed).split(kStopping)
//   B probe          Rng(seed).split(kProbe)

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qsgd/objective.hpp"
#include "qsgd/quantizer.hpp"
#include "qsgd/rng.hpp"
#include "qsgd/vector_ops.hpp"

namespace qsgd {

/// Bits charged for an unquantized message of n entries.
constexpr std::uint64_t full_precision_bits(std::size_t n) { return 32ull * n; }

struct ConstantStep {
  double eta = 0.1;
};

/// eta = 1 / (L + 1/gamma) with gamma = (R / sigma) sqrt(2 / T). When sigma is
/// not given, sigma^2 = (1 + beta) B / (K m_b) with B from
/// estimate_second_moment at x0 and beta the quantizer's variance_blowup
/// (0 without quantization).
struct TunedStep {
  double radius = 1.0;
  std::optional<double> sigma;
};

using StepSchedule = std::variant<ConstantStep, TunedStep>;

/// Wall-clock measurement; excluded from equality so that metrics of two
/// runs with the same seed compare equal.
struct WallClock {
  double seconds = 0.0;
  friend bool operator==(const WallClock&, const WallClock&) { return true; }
};

struct RunConfig {
  std::size_t workers = 1;       // K
  std::size_t iterations = 100;  // T
  std::size_t minibatch = 1;     // m_b per worker
  StepSchedule step = ConstantStep{};
  std::optional<QuantizerConfig> quantizer;  // nullopt = full precision
  std::uint64_t seed = 0;
  double projection_radius = 0.0;   // project onto the L2 ball of this radius; 0 = off
  std::size_t quantize_min_size = 0;  // smaller gradients are sent unquantized
  std::size_t eval_every = 1;       // record f(x_bar) every this many steps; 0 = start and end only
  std::optional<DenseVector> x0;    // default: zeros
  std::size_t threads = 0;          // 0 = QSGD_THREADS or 1

  /// Throws ConfigError naming the offending key.
  void validate(const Objective& obj) const;
};

struct IterationRecord {
  std::size_t iteration = 0;       // steps taken
  double loss = 0.0;               // f(x_bar_t)
  double grad_norm = 0.0;          // |grad f(x_bar_t)|
  double bits_per_worker = 0.0;    // mean bits per worker sent in step t (0 at t = 0)
  std::uint64_t cumulative_bits = 0;  // all workers, steps 1..t
  WallClock wall;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct RunMetrics {
  std::vector<IterationRecord> records;
  std::vector<std::uint64_t> step_bits;  // per step, summed over workers
  std::uint64_t total_bits = 0;
  std::uint64_t messages = 0;
  double eta = 0.0;
  double final_loss = 0.0;               // f(x_bar_T)
  DenseVector averaged_x;                // x_bar_T = mean of x_0..x_T
  DenseVector last_x;                    // x_T
  double quantization_variance_ratio = 0.0;  // sum |Q(g)-g|^2 / sum |g|^2 over messages
  WallClock wall;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// Average of `minibatch` component gradients at uniformly drawn indices.
DenseVector stochastic_gradient(const Objective& obj, std::span<const double> x,
                                std::size_t minibatch, Rng& rng);

/// Average of the component gradients at `indices`, in order.
DenseVector minibatch_gradient(const Objective& obj, std::span<const double> x,
                               std::span<const std::size_t> indices);

/// Resolves the step size a run with this config would use.
double resolve_step(const Objective& obj, const RunConfig& cfg);

/// Called after every step with (t, x_t), t = 1..T.
using StepObserver = std::function<void(std::size_t, std::span<const double>)>;

RunMetrics run_parallel_sgd(const Objective& obj, const RunConfig& cfg,
                            const StepObserver& observer = {});

struct NonconvexResult {
  double grad_norm_sq = 0.0;   // |grad f(x_R)|^2
  std::size_t stopping_index = 0;  // R, uniform on 1..T
  RunMetrics metrics;
};

/// Runs with constant eta = c / L (overriding cfg.step) and reports the squared
/// gradient norm at a uniformly random iterate.
NonconvexResult run_nonconvex(const Objective& obj, RunConfig cfg, double c = 0.5);

/// Mean over `trials` independent quantizations of |Q(g) - g|^2 / |g|^2.
/// Trial i uses rng.split(i).
double empirical_variance_ratio(std::span<const double> g, const QuantizerConfig& cfg,
                                std::size_t trials, const Rng& rng);

/// Same, for one realized single-sample stochastic gradient of obj at x.
double empirical_variance_ratio(const Objective& obj, std::span<const double> x,
                                const QuantizerConfig& cfg, std::size_t trials,
                                std::uint64_t seed);

/// Worker-thread count from the QSGD_THREADS environment variable (>= 1).
std::size_t threads_from_env();

}  // namespace qsgd
