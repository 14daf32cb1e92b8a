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

// Deterministic top-magnitude quantizer for full gradient descent.
//
// I(v) is the shortest magnitude-greedy prefix of coordinates whose absolute
// values sum to at least |v|_2, and Q(v)_i = sgn(v_i) |v|_2 on I(v), 0 off it.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qsgd/codec.hpp"
#include "qsgd/objective.hpp"
#include "qsgd/vector_ops.hpp"

namespace qsgd {

struct TopSet {
  std::vector<std::size_t> indices;  // greedy order: descending |v_i|, ties by lower index
  double norm = 0.0;
};

/// ceil(sqrt(n)) computed exactly on integers.
std::size_t ceil_sqrt(std::size_t n);

/// Empty set with norm 0 for the zero vector.
TopSet top_set(std::span<const double> v);

DenseVector quantize_gd(std::span<const double> v);

/// Wire form of a quantize_gd output:
///   norm rounded up to binary32 (32 bits)
///   k = |I|       in ceil(log2(ceil(sqrt n) + 1)) bits
///   rank of I     in ceil(log2 C(n, k)) bits (combinatorial number system)
///   k sign bits   in increasing index order, 1 = positive
/// A zero vector is the 32-bit norm alone.
EncodedGradient encode_gd(std::span<const double> q);

/// Reconstructs sgn * norm on the encoded support, norm being the transmitted
/// binary32 value.
DenseVector decode_gd(const EncodedGradient& e);

/// sqrt(n) (log2 n + 1 + log2 e) + 32.
double gd_length_bound(std::size_t n);

/// c * l / (L^2 sqrt(n)) for the objective's constants.
double max_gd_step(const Objective& obj, double c = 0.5);

struct GdTrajectory {
  std::vector<double> values;       // f(x_t), t = 0..T
  std::vector<std::uint64_t> bits;  // encoded message length at step t = 0..T-1
  std::vector<DenseVector> iterates;  // x_t, t = 0..T (empty unless requested)
  DenseVector final_x;
};

/// x <- x - eta * decode(encode(Q(grad f(x)))) for `iterations` steps.
/// Throws DivergenceError naming eta once f increases on 10 consecutive
/// steps or becomes non-finite.
GdTrajectory run_quantized_gd(const Objective& obj, std::span<const double> x0, double eta,
                              std::size_t iterations, bool keep_iterates = false);

}  // namespace qsgd
