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

#include "qsgd/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsgd/errors.hpp"

namespace qsgd {

std::string_view to_string(NormMode mode) {
  return mode == NormMode::kL2 ? "l2" : "max";
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kSparse: return "sparse";
    case Scheme::kDense: return "dense";
    case Scheme::kTopSet: return "topset";
  }
  return "unknown";
}

NormMode parse_norm_mode(std::string_view text) {
  if (text == "l2" || text == "L2") return NormMode::kL2;
  if (text == "max" || text == "Max") return NormMode::kMax;
  throw ConfigError("unknown norm mode '" + std::string(text) + "'", "norm");
}

Scheme parse_scheme(std::string_view text) {
  if (text == "sparse") return Scheme::kSparse;
  if (text == "dense") return Scheme::kDense;
  throw ConfigError("unknown coding scheme '" + std::string(text) + "'", "scheme");
}

void QuantizerConfig::validate() const {
  if (levels < 1 || levels > kMaxLevels) {
    throw ConfigError("levels must be in [1, 2^30], got " + std::to_string(levels),
                      "levels");
  }
  if (bucket_size < 1) throw ConfigError("bucket_size must be >= 1", "bucket");
  if (norm != NormMode::kL2 && norm != NormMode::kMax) {
    throw ConfigError("invalid norm mode", "norm");
  }
  if (scheme != Scheme::kSparse && scheme != Scheme::kDense) {
    throw ConfigError("quantizer scheme must be sparse or dense", "scheme");
  }
}

std::uint32_t QuantizerConfig::levels_for_bits(unsigned bits) {
  if (bits > 30) throw ConfigError("bits must be in [0, 30]", "bits");
  return std::uint32_t{1} << bits;
}

std::size_t QuantizedBucket::nonzeros() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(levels.begin(), levels.end(), [](std::uint32_t l) { return l != 0; }));
}

void QuantizedGradient::validate() const {
  config.validate();
  std::size_t dim = 0;
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    const QuantizedBucket& bucket = buckets[b];
    if (bucket.signs.size() != bucket.levels.size()) {
      throw DomainError("bucket " + std::to_string(b) + ": signs/levels length mismatch");
    }
    if (bucket.dim() == 0 || bucket.dim() > config.bucket_size) {
      throw DomainError("bucket " + std::to_string(b) + ": bad dimension");
    }
    if (b + 1 < buckets.size() && bucket.dim() != config.bucket_size) {
      throw DomainError("bucket " + std::to_string(b) + ": only the last bucket may be short");
    }
    if (!(bucket.scale >= 0.0f) || !std::isfinite(bucket.scale)) {
      throw DomainError("bucket " + std::to_string(b) + ": scale must be finite and >= 0");
    }
    for (std::size_t i = 0; i < bucket.dim(); ++i) {
      if (bucket.levels[i] > config.levels) {
        throw DomainError("bucket " + std::to_string(b) + ": level exceeds s");
      }
      if (bucket.signs[i] != 1 && bucket.signs[i] != -1) {
        throw DomainError("bucket " + std::to_string(b) + ": sign must be +-1");
      }
      if (bucket.scale == 0.0f && bucket.levels[i] != 0) {
        throw DomainError("bucket " + std::to_string(b) + ": zero scale with nonzero level");
      }
    }
    dim += bucket.dim();
  }
  if (dim != total_dim) throw DomainError("bucket dimensions do not sum to total_dim");
}

std::size_t QuantizedGradient::nonzeros() const noexcept {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.nonzeros();
  return n;
}

QuantizedGradient canonicalize(QuantizedGradient q) {
  for (auto& b : q.buckets) {
    for (std::size_t i = 0; i < b.dim(); ++i) {
      if (b.levels[i] == 0) b.signs[i] = 1;
    }
  }
  return q;
}

std::uint32_t level_assign(double a, std::uint32_t s, double u) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw DomainError("level_assign: a = " + std::to_string(a) + " is outside [0, 1]");
  }
  if (s == 0) throw DomainError("level_assign: s must be >= 1");
  const double scaled = a * s;
  double floor_part = std::floor(scaled);
  if (floor_part >= s) floor_part = s - 1;
  const double p = scaled - floor_part;
  const auto l = static_cast<std::uint32_t>(floor_part);
  return u < p ? l + 1 : l;
}

QuantizedBucket quantize_bucket(std::span<const double> v, std::uint32_t s,
                                NormMode norm, Rng& rng) {
  if (v.empty()) throw DomainError("quantize_bucket: empty bucket");
  require_finite(v, "quantize_bucket");

  QuantizedBucket out;
  out.signs.resize(v.size());
  out.levels.assign(v.size(), 0);
  for (std::size_t i = 0; i < v.size(); ++i) out.signs[i] = v[i] < 0.0 ? -1 : 1;

  const double magnitude = norm == NormMode::kL2 ? norm2(v) : max_abs(v);
  out.scale = round_up_to_float(magnitude);
  if (out.scale == 0.0f) return out;

  // The float scale is used for both normalising and reconstructing, so the
  // expected reconstruction equals v exactly.
  const double scale = out.scale;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::min(1.0, std::abs(v[i]) / scale);
    out.levels[i] = level_assign(a, s, rng.uniform());
  }
  return out;
}

QuantizedGradient quantize(std::span<const double> v, const QuantizerConfig& cfg,
                           const Rng& stream) {
  cfg.validate();
  if (v.empty()) throw DomainError("quantize: empty vector");
  require_finite(v, "quantize");

  QuantizedGradient q;
  q.config = cfg;
  q.total_dim = v.size();
  const std::size_t d = cfg.bucket_size;
  q.buckets.reserve((v.size() + d - 1) / d);
  for (std::size_t start = 0, b = 0; start < v.size(); start += d, ++b) {
    const std::size_t len = std::min(d, v.size() - start);
    Rng rng = stream.split(b);
    q.buckets.push_back(quantize_bucket(v.subspan(start, len), cfg.levels, cfg.norm, rng));
  }
  return q;
}

QuantizedGradient quantize(std::span<const double> v, const QuantizerConfig& cfg) {
  return quantize(v, cfg, Rng(cfg.seed));
}

void dequantize_into(const QuantizedGradient& q, std::span<double> out) {
  if (out.size() != q.total_dim) throw DomainError("dequantize: output size mismatch");
  const double s = q.config.levels;
  std::size_t k = 0;
  for (const auto& b : q.buckets) {
    const double scale = b.scale;
    for (std::size_t i = 0; i < b.dim(); ++i, ++k) {
      out[k] = scale * b.signs[i] * (b.levels[i] / s);
    }
  }
}

DenseVector dequantize(const QuantizedGradient& q) {
  DenseVector out(q.total_dim);
  dequantize_into(q, out);
  return out;
}

double variance_blowup(std::size_t d, std::uint32_t s) {
  const double dd = static_cast<double>(d);
  const double ss = static_cast<double>(s);
  return std::min(dd / (ss * ss), std::sqrt(dd) / ss);
}

}  // namespace qsgd
