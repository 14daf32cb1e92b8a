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

#include "qsgd/bitstream.hpp"

#include <cassert>

#include "qsgd/errors.hpp"

namespace qsgd {

BitStream BitStream::from_string(std::string_view bits) {
  BitStream out;
  for (char c : bits) {
    if (c == '0' || c == '1') {
      out.push_bit(c == '1');
    } else if (c != ' ' && c != '\'') {
      throw DomainError(std::string("invalid bit character '") + c + "'");
    }
  }
  return out;
}

void BitStream::push_bit(bool bit) {
  if ((size_ & 7) == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (size_ & 7));
  ++size_;
}

void BitStream::push_bits(std::uint64_t value, unsigned count) {
  assert(count <= 64);
  for (unsigned i = count; i > 0; --i) push_bit((value >> (i - 1)) & 1u);
}

void BitStream::append(const BitStream& other) {
  if ((size_ & 7) == 0) {
    bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
    size_ += other.size_;
    return;
  }
  for (std::size_t i = 0; i < other.size_; ++i) push_bit(other.bit(i));
}

void BitStream::truncate(std::size_t bits) {
  if (bits >= size_) return;
  size_ = bits;
  bytes_.resize((bits + 7) / 8);
  if (bits & 7) bytes_.back() &= static_cast<std::uint8_t>(0xFFu << (8 - (bits & 7)));
}

std::string BitStream::to_string() const {
  std::string s;
  s.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) s.push_back(bit(i) ? '1' : '0');
  return s;
}

std::vector<std::uint8_t> BitStream::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(8 + bytes_.size());
  const auto n = static_cast<std::uint64_t>(size_);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  out.insert(out.end(), bytes_.begin(), bytes_.end());
  return out;
}

BitStream BitStream::deserialize(std::span<const std::uint8_t> data,
                                 std::size_t* consumed) {
  if (data.size() < 8) {
    throw TruncationError("bit stream header needs 8 bytes, got " +
                          std::to_string(data.size()));
  }
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(data[i]) << (8 * i);
  const std::uint64_t nbytes = n / 8 + ((n & 7) ? 1 : 0);
  if (nbytes > data.size() - 8) {
    throw TruncationError("bit stream declares " + std::to_string(n) +
                          " bits but only " + std::to_string(data.size() - 8) +
                          " payload bytes are present");
  }
  BitStream out;
  out.bytes_.assign(data.begin() + 8, data.begin() + 8 + static_cast<std::ptrdiff_t>(nbytes));
  out.size_ = static_cast<std::size_t>(n);
  if ((n & 7) && (out.bytes_.back() & (0xFFu >> (n & 7)))) {
    throw CorruptionError("nonzero padding bits in bit stream");
  }
  if (consumed) *consumed = static_cast<std::size_t>(8 + nbytes);
  return out;
}

bool BitReader::read_bit() {
  if (cursor_ >= stream_->size()) {
    throw TruncationError("bit stream exhausted at bit " + std::to_string(cursor_));
  }
  return stream_->bit(cursor_++);
}

std::uint64_t BitReader::read_bits(unsigned count) {
  assert(count <= 64);
  if (count > remaining()) {
    throw TruncationError("need " + std::to_string(count) + " bits at bit " +
                          std::to_string(cursor_) + ", only " +
                          std::to_string(remaining()) + " remain");
  }
  std::uint64_t v = 0;
  for (unsigned i = 0; i < count; ++i) v = (v << 1) | (stream_->bit(cursor_++) ? 1u : 0u);
  return v;
}

}  // namespace qsgd
