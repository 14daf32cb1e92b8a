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

// Stochastic gradient quantization.
//
// A bucket v of length d is mapped to (scale, signs, levels) with
//
//   scale     = ||v||_2   (L2 mode)   or   max_i |v_i|   (Max mode)
//   signs[i]  = sgn(v_i), sgn(0) = +1
//   levels[i] = l + 1 with probability a*s - l, else l,
//               where a = |v_i| / scale and l = floor(a*s)
//
// and reconstructed as scale * signs[i] * levels[i] / s. The reconstruction is
// unbiased, lies on the grid {0, scale/s, ..., scale}, and in L2 mode its
// variance is at most min(d/s^2, sqrt(d)/s) * ||v||^2.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qsgd/rng.hpp"
#include "qsgd/vector_ops.hpp"

namespace qsgd {

enum class NormMode : std::uint8_t { kL2 = 0, kMax = 1 };

/// Wire coding scheme. kTopSet is only produced by the gradient-descent
/// quantizer (gd_quant.hpp) and is not a valid QuantizerConfig scheme.
enum class Scheme : std::uint8_t { kSparse = 0, kDense = 1, kTopSet = 2 };

std::string_view to_string(NormMode mode);
std::string_view to_string(Scheme scheme);
NormMode parse_norm_mode(std::string_view text);
Scheme parse_scheme(std::string_view text);

inline constexpr std::uint32_t kMaxLevels = std::uint32_t{1} << 30;

struct QuantizerConfig {
  std::uint32_t levels = 4;          // s
  std::uint32_t bucket_size = 512;   // d
  NormMode norm = NormMode::kL2;
  Scheme scheme = Scheme::kSparse;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// "b bits" means s = 2^b quantization levels; the sign travels separately.
  static std::uint32_t levels_for_bits(unsigned bits);

  friend bool operator==(const QuantizerConfig&, const QuantizerConfig&) = default;
};

struct QuantizedBucket {
  float scale = 0.0f;
  std::vector<std::int8_t> signs;      // each -1 or +1
  std::vector<std::uint32_t> levels;   // each in [0, s]

  std::size_t dim() const noexcept { return levels.size(); }
  std::size_t nonzeros() const noexcept;

  friend bool operator==(const QuantizedBucket&, const QuantizedBucket&) = default;
};

struct QuantizedGradient {
  QuantizerConfig config;
  std::vector<QuantizedBucket> buckets;
  std::size_t total_dim = 0;

  /// Checks every structural invariant; throws DomainError on violation.
  void validate() const;
  std::size_t nonzeros() const noexcept;

  friend bool operator==(const QuantizedGradient&, const QuantizedGradient&) = default;
};

/// Sets the sign of every zero-level coordinate to +1. Such signs carry no
/// information and are not transmitted by the sparse scheme.
QuantizedGradient canonicalize(QuantizedGradient q);

/// Random level for a normalised magnitude a in [0, 1], given a uniform draw
/// u in [0, 1). When a == 1 the interval index is clamped to s - 1 so the
/// result is exactly s.
std::uint32_t level_assign(double a, std::uint32_t s, double u);

/// Quantizes a single bucket, drawing one uniform per coordinate from `rng`.
QuantizedBucket quantize_bucket(std::span<const double> v, std::uint32_t s,
                                NormMode norm, Rng& rng);

/// Splits v into consecutive buckets of cfg.bucket_size (the last may be
/// shorter) and quantizes bucket b with `stream.split(b)`.
QuantizedGradient quantize(std::span<const double> v, const QuantizerConfig& cfg,
                           const Rng& stream);

/// Convenience overload using Rng(cfg.seed) as the stream.
QuantizedGradient quantize(std::span<const double> v, const QuantizerConfig& cfg);

DenseVector dequantize(const QuantizedGradient& q);
void dequantize_into(const QuantizedGradient& q, std::span<double> out);

/// min(d/s^2, sqrt(d)/s): bound on E||Q(v)-v||^2 / ||v||^2 in L2 mode.
double variance_blowup(std::size_t d, std::uint32_t s);

}  // namespace qsgd
