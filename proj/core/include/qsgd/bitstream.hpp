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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qsgd {

/// Append-only bit sequence with an exact bit count.
///
/// Bits are packed MSB-first into bytes; unused bits of the final byte are
/// always zero.
class BitStream {
 public:
  BitStream() = default;

  /// Parses a string of '0'/'1' characters. Mostly useful in tests.
  static BitStream from_string(std::string_view bits);

  void push_bit(bool bit);

  /// Appends the low `count` bits of `value`, most significant first.
  /// `count` may be 0..64.
  void push_bits(std::uint64_t value, unsigned count);

  void append(const BitStream& other);

  /// Drops everything after the first `bits` bits.
  void truncate(std::size_t bits);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  bool bit(std::size_t i) const noexcept {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u;
  }
  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

  std::string to_string() const;

  /// Wire form: 64-bit little-endian bit count, then ceil(size/8) bytes.
  std::vector<std::uint8_t> serialize() const;

  /// Inverse of serialize(). `consumed`, if given, receives the number of
  /// bytes read. Throws TruncationError on short input and CorruptionError if
  /// padding bits are nonzero.
  static BitStream deserialize(std::span<const std::uint8_t> data,
                               std::size_t* consumed = nullptr);

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

/// Forward cursor over a BitStream. Reading past the end throws
/// TruncationError.
class BitReader {
 public:
  explicit BitReader(const BitStream& stream, std::size_t cursor = 0)
      : stream_(&stream), cursor_(cursor) {}

  bool read_bit();

  /// Reads `count` (0..64) bits, most significant first.
  std::uint64_t read_bits(unsigned count);

  std::size_t position() const noexcept { return cursor_; }
  std::size_t remaining() const noexcept { return stream_->size() - cursor_; }
  bool at_end() const noexcept { return cursor_ >= stream_->size(); }

 private:
  const BitStream* stream_;
  std::size_t cursor_;
};

}  // namespace qsgd
