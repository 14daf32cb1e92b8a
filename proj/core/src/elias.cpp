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

#include "qsgd/elias.hpp"

#include <array>
#include <bit>
#include <limits>

#include "qsgd/errors.hpp"

namespace qsgd {

void elias_encode(std::uint64_t k, BitStream& out) {
  if (k == 0) throw DomainError("Elias code is defined for k >= 1 (use Elias' for 0)");
  // A 64-bit value needs at most 4 groups (64, 6, 3 and 2 bits wide).
  std::array<std::uint64_t, 8> groups{};
  std::size_t count = 0;
  while (k > 1) {
    groups[count++] = k;
    k = static_cast<std::uint64_t>(std::bit_width(k)) - 1;
  }
  while (count > 0) {
    const std::uint64_t g = groups[--count];
    out.push_bits(g, static_cast<unsigned>(std::bit_width(g)));
  }
  out.push_bit(false);
}

BitStream elias_encode(std::uint64_t k) {
  BitStream out;
  elias_encode(k, out);
  return out;
}

std::size_t elias_length(std::uint64_t k) {
  if (k == 0) throw DomainError("Elias code is defined for k >= 1");
  std::size_t len = 1;
  while (k > 1) {
    const auto w = static_cast<std::uint64_t>(std::bit_width(k));
    len += w;
    k = w - 1;
  }
  return len;
}

std::uint64_t elias_decode(BitReader& in) {
  std::uint64_t n = 1;
  while (in.read_bit()) {
    if (n > 63) {
      throw CorruptionError("Elias group of " + std::to_string(n + 1) +
                            " bits overflows 64-bit values");
    }
    n = (std::uint64_t{1} << n) | in.read_bits(static_cast<unsigned>(n));
  }
  return n;
}

EliasDecoded elias_decode(const BitStream& in, std::size_t cursor) {
  BitReader reader(in, cursor);
  const std::uint64_t v = elias_decode(reader);
  return {v, reader.position() - cursor};
}

void elias_prime_encode(std::uint64_t k, BitStream& out) {
  if (k == std::numeric_limits<std::uint64_t>::max()) {
    throw DomainError("Elias' argument out of range");
  }
  elias_encode(k + 1, out);
}

BitStream elias_prime_encode(std::uint64_t k) {
  BitStream out;
  elias_prime_encode(k, out);
  return out;
}

std::size_t elias_prime_length(std::uint64_t k) {
  if (k == std::numeric_limits<std::uint64_t>::max()) {
    throw DomainError("Elias' argument out of range");
  }
  return elias_length(k + 1);
}

std::uint64_t elias_prime_decode(BitReader& in) { return elias_decode(in) - 1; }

}  // namespace qsgd
