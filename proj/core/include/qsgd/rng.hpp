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
#include <limits>

namespace qsgd {

/// Seedable, splittable 64-bit generator (SplitMix64 stepping).
///
/// Every random decision in the library is taken from a substream obtained by
/// `split()`-ing a root generator along a path of integers, e.g.
/// `Rng(seed).split(kQuantize).split(iteration).split(worker)`. Substreams are
/// statistically independent of each other and of the parent, and deriving
/// one never advances the parent, so results do not depend on the order in
/// which substreams are created.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(mix(seed)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  /// Child stream keyed by `stream`. Does not advance *this.
  constexpr Rng split(std::uint64_t stream) const noexcept {
    Rng child(0);
    child.state_ = mix(state_ ^ mix(stream + kSplitSalt));
    return child;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Unbiased (rejection on the 128-bit product).
  std::size_t index(std::size_t n) noexcept;

  /// Standard normal deviate.
  double normal() noexcept;

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSplitSalt = 0xd1b54a32d192ed03ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Named substream roots. Values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
  kSample = 1,
  kQuantize = 2,
  kStopping = 3,
  kData = 4,
  kProbe = 5,
  kFullGradient = 6,
};

constexpr Rng substream(const Rng& root, Stream s) noexcept {
  return root.split(static_cast<std::uint64_t>(s));
}

}  // namespace qsgd
