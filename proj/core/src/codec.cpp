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

#include "qsgd/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "qsgd/elias.hpp"
#include "qsgd/errors.hpp"

namespace qsgd {
namespace {

EncodedGradient make_header(const QuantizedGradient& q, Scheme scheme) {
  q.validate();
  if (q.total_dim > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("gradient dimension exceeds the 32-bit wire header");
  }
  EncodedGradient e;
  e.n = static_cast<std::uint32_t>(q.total_dim);
  e.d = q.config.bucket_size;
  e.s = q.config.levels;
  e.scheme = scheme;
  e.norm = q.config.norm;
  return e;
}

QuantizedGradient shell_from_header(const EncodedGradient& e, Scheme expected) {
  if (e.scheme != expected) throw CorruptionError("scheme mismatch in encoded gradient");
  if (e.declared_bits != e.payload.size()) {
    throw CorruptionError("declared_bits " + std::to_string(e.declared_bits) +
                          " disagrees with payload length " +
                          std::to_string(e.payload.size()));
  }
  QuantizedGradient q;
  q.config.levels = e.s;
  q.config.bucket_size = e.d;
  q.config.norm = e.norm;
  q.config.scheme = expected;
  try {
    q.config.validate();
  } catch (const ConfigError& err) {
    throw CorruptionError(std::string("bad header: ") + err.what());
  }
  if (e.n == 0) throw CorruptionError("bad header: n must be >= 1");
  q.total_dim = e.n;
  return q;
}

void write_scale(float scale, BitStream& out) {
  out.push_bits(std::bit_cast<std::uint32_t>(scale), kScaleBits);
}

float read_scale(BitReader& in) {
  const auto scale = std::bit_cast<float>(static_cast<std::uint32_t>(in.read_bits(kScaleBits)));
  if (!std::isfinite(scale) || std::signbit(scale)) {
    throw CorruptionError("decoded scale is not a finite nonnegative float");
  }
  return scale;
}

void require_consumed(const BitReader& in) {
  if (!in.at_end()) {
    throw CorruptionError(std::to_string(in.remaining()) +
                          " trailing bits after the last bucket");
  }
}

template <typename Fn>
void for_each_bucket_dim(const EncodedGradient& e, Fn&& fn) {
  for (std::uint64_t start = 0; start < e.n; start += e.d) {
    fn(static_cast<std::size_t>(std::min<std::uint64_t>(e.d, e.n - start)));
  }
}

}  // namespace

EncodedGradient encode_sparse(const QuantizedGradient& q) {
  EncodedGradient e = make_header(q, Scheme::kSparse);
  BitStream& out = e.payload;
  for (const QuantizedBucket& b : q.buckets) {
    write_scale(b.scale, out);
    std::size_t prev = 0;  // 1-based index of the previous nonzero
    for (std::size_t i = 0; i < b.dim(); ++i) {
      if (b.levels[i] == 0) continue;
      elias_encode(i + 1 - prev, out);
      out.push_bit(b.signs[i] > 0);
      elias_encode(b.levels[i], out);
      prev = i + 1;
    }
    elias_encode(b.dim() - prev + 1, out);
  }
  e.declared_bits = out.size();
  return e;
}

QuantizedGradient decode_sparse(const EncodedGradient& e) {
  QuantizedGradient q = shell_from_header(e, Scheme::kSparse);
  BitReader in(e.payload);
  for_each_bucket_dim(e, [&](std::size_t dim) {
    QuantizedBucket b;
    b.scale = read_scale(in);
    b.signs.assign(dim, 1);
    b.levels.assign(dim, 0);
    std::uint64_t pos = 0;  // 1-based index of the previous nonzero
    for (;;) {
      const std::uint64_t gap = elias_decode(in);
      if (gap > dim + 1 - pos) throw CorruptionError("gap overruns bucket");
      pos += gap;
      if (pos == dim + 1) break;
      const bool positive = in.read_bit();
      const std::uint64_t level = elias_decode(in);
      if (level > e.s) throw CorruptionError("level exceeds s");
      b.signs[pos - 1] = positive ? 1 : -1;
      b.levels[pos - 1] = static_cast<std::uint32_t>(level);
    }
    if (b.scale == 0.0f && b.nonzeros() != 0) {
      throw CorruptionError("zero scale with nonzero levels");
    }
    q.buckets.push_back(std::move(b));
  });
  require_consumed(in);
  return q;
}

EncodedGradient encode_dense(const QuantizedGradient& q) {
  EncodedGradient e = make_header(q, Scheme::kDense);
  BitStream& out = e.payload;
  for (const QuantizedBucket& b : q.buckets) {
    write_scale(b.scale, out);
    for (std::size_t i = 0; i < b.dim(); ++i) {
      out.push_bit(b.signs[i] > 0);
      elias_prime_encode(b.levels[i], out);
    }
  }
  e.declared_bits = out.size();
  return e;
}

QuantizedGradient decode_dense(const EncodedGradient& e) {
  QuantizedGradient q = shell_from_header(e, Scheme::kDense);
  BitReader in(e.payload);
  for_each_bucket_dim(e, [&](std::size_t dim) {
    QuantizedBucket b;
    b.scale = read_scale(in);
    b.signs.resize(dim);
    b.levels.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      b.signs[i] = in.read_bit() ? 1 : -1;
      const std::uint64_t level = elias_prime_decode(in);
      if (level > e.s) throw CorruptionError("level exceeds s");
      b.levels[i] = static_cast<std::uint32_t>(level);
    }
    if (b.scale == 0.0f && b.nonzeros() != 0) {
      throw CorruptionError("zero scale with nonzero levels");
    }
    q.buckets.push_back(std::move(b));
  });
  require_consumed(in);
  return q;
}

EncodedGradient encode(const QuantizedGradient& q) {
  switch (q.config.scheme) {
    case Scheme::kSparse: return encode_sparse(q);
    case Scheme::kDense: return encode_dense(q);
    default: throw ConfigError("quantizer scheme must be sparse or dense", "scheme");
  }
}

QuantizedGradient decode(const EncodedGradient& e) {
  switch (e.scheme) {
    case Scheme::kSparse: return decode_sparse(e);
    case Scheme::kDense: return decode_dense(e);
    default: throw CorruptionError("unsupported scheme in encoded gradient");
  }
}

std::uint64_t encoded_length(const QuantizedGradient& q, Scheme scheme) {
  std::uint64_t bits = 0;
  for (const QuantizedBucket& b : q.buckets) {
    bits += kScaleBits;
    if (scheme == Scheme::kDense) {
      for (std::uint32_t level : b.levels) bits += 1 + elias_prime_length(level);
    } else {
      std::size_t prev = 0;
      for (std::size_t i = 0; i < b.dim(); ++i) {
        if (b.levels[i] == 0) continue;
        bits += elias_length(i + 1 - prev) + 1 + elias_length(b.levels[i]);
        prev = i + 1;
      }
      bits += elias_length(b.dim() - prev + 1);
    }
  }
  return bits;
}

std::optional<double> theoretical_length_bound(std::size_t n, std::uint32_t s,
                                               Scheme scheme, double slack) {
  if (n == 0 || s == 0) return std::nullopt;
  const double nn = static_cast<double>(n);
  const double ss = static_cast<double>(s);
  const double root_n = std::sqrt(nn);
  if (scheme == Scheme::kSparse) {
    if (ss * ss + root_n > nn / 2.0) return std::nullopt;
    const double support = ss * (ss + root_n);
    return (3.0 + (1.5 + slack) * std::log2(2.0 * (ss * ss + nn) / support)) * support +
           static_cast<double>(kScaleBits);
  }
  if (scheme == Scheme::kDense) {
    if (static_cast<std::uint64_t>(s) * s == n) return 2.8 * nn + static_cast<double>(kScaleBits);
    const double energy = (ss * ss + std::min(nn, ss * root_n)) / nn;
    return static_cast<double>(kScaleBits) +
           ((1.0 + slack) / 2.0 * (std::log2(1.0 + energy) + 1.0) + 2.0) * nn;
  }
  return std::nullopt;
}

std::optional<double> bucketed_length_bound(std::size_t n, std::size_t d, std::uint32_t s,
                                            Scheme scheme, double slack) {
  if (d == 0) return std::nullopt;
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += d) {
    const auto bound = theoretical_length_bound(std::min(d, n - start), s, scheme, slack);
    if (!bound) return std::nullopt;
    total += *bound;
  }
  return total;
}

}  // namespace qsgd
