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

// Recursive Elias (omega) code for positive integers.
//
// Decoding is normative: start with N = 1; while the next bit is 1, read that
// bit followed by N more bits and let the (N+1)-bit binary number be the new
// N; a 0 bit terminates and yields N. The encoder emits the unique shortest
// string this decoder maps to k:
//
//   1  -> 0
//   2  -> 10 0
//   3  -> 11 0
//   16 -> 10 100 10000 0

#include <cstddef>
#include <cstdint>

#include "qsgd/bitstream.hpp"

namespace qsgd {

/// Appends Elias(k). Throws DomainError for k == 0.
void elias_encode(std::uint64_t k, BitStream& out);
BitStream elias_encode(std::uint64_t k);

/// |Elias(k)| without materialising the code.
std::size_t elias_length(std::uint64_t k);

/// Reads one code at the reader's cursor. Throws TruncationError if the stream
/// ends mid-code and CorruptionError if the value would not fit in 64 bits.
std::uint64_t elias_decode(BitReader& in);

struct EliasDecoded {
  std::uint64_t value;
  std::size_t bits_consumed;
};
EliasDecoded elias_decode(const BitStream& in, std::size_t cursor = 0);

/// Elias'(k) = Elias(k + 1), defined for k >= 0.
void elias_prime_encode(std::uint64_t k, BitStream& out);
BitStream elias_prime_encode(std::uint64_t k);
std::size_t elias_prime_length(std::uint64_t k);
std::uint64_t elias_prime_decode(BitReader& in);

}  // namespace qsgd
