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

// Lossless wire codecs for quantized gradients.
//
// Both schemes concatenate buckets in index order. Every bucket starts with
// its scale as an IEEE-754 binary32 bit pattern, most significant bit first.
//
// Sparse: for each nonzero level in index order
//   Elias(gap) | sign bit (1 = positive) | Elias(level)
// where gap is the distance from the previous nonzero (the first gap is the
// 1-based index). The bucket ends with Elias(remaining + 1), remaining being
// the number of coordinates after the last nonzero; the decoder recognises it
// because it lands exactly one past the bucket end.
//
// Dense: for every coordinate
//   sign bit | Elias(level + 1)

#include <cstddef>
#include <cstdint>
#include <optional>

#include "qsgd/bitstream.hpp"
#include "qsgd/quantizer.hpp"

namespace qsgd {

/// Number of bits used for a bucket scale (binary32).
inline constexpr std::size_t kScaleBits = 32;

struct EncodedGradient {
  BitStream payload;
  std::uint32_t n = 0;  // total dimension
  std::uint32_t d = 0;  // bucket size
  std::uint32_t s = 0;  // levels
  Scheme scheme = Scheme::kSparse;
  NormMode norm = NormMode::kL2;
  std::uint64_t declared_bits = 0;  // == payload.size()

  friend bool operator==(const EncodedGradient&, const EncodedGradient&) = default;
};

EncodedGradient encode_sparse(const QuantizedGradient& q);
QuantizedGradient decode_sparse(const EncodedGradient& e);

EncodedGradient encode_dense(const QuantizedGradient& q);
QuantizedGradient decode_dense(const EncodedGradient& e);

/// Dispatch on q.config.scheme / e.scheme.
EncodedGradient encode(const QuantizedGradient& q);
QuantizedGradient decode(const EncodedGradient& e);

/// Exact encoded length without building the payload.
std::uint64_t encoded_length(const QuantizedGradient& q, Scheme scheme);

/// Closed-form expected-length bound in bits for one bucket of dimension n.
///
/// Sparse: (3 + (3/2 + slack) * log2(2(s^2+n) / (s(s+sqrt n)))) * s(s+sqrt n) + 32,
///         applicable only when s^2 + sqrt(n) <= n/2.
/// Dense:  2.8 n + 32 when s^2 == n; otherwise
///         32 + ((1+slack)/2 * (log2(1 + (s^2 + min(n, s sqrt n))/n) + 1) + 2) * n.
///
/// `slack` stands in for the asymptotic o(1) terms. Returns nullopt when the
/// bound does not apply.
std::optional<double> theoretical_length_bound(std::size_t n, std::uint32_t s,
                                               Scheme scheme, double slack = 0.5);

/// Sum of theoretical_length_bound over the buckets of an n-vector split into
/// buckets of size d.
std::optional<double> bucketed_length_bound(std::size_t n, std::size_t d, std::uint32_t s,
                                            Scheme scheme, double slack = 0.5);

}  // namespace qsgd
