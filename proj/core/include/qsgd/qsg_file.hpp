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

// .qsg container for one encoded gradient:
//
//   offset  size  field
//   0       4     magic "QSG1"
//   4       4     n       (u32, little-endian)
//   8       4     d       (u32, little-endian)
//   12      4     s       (u32, little-endian)
//   16      1     scheme  (0 = sparse, 1 = dense)
//   17      1     norm    (0 = l2, 1 = max)
//   18      ...   BitStream::serialize() of the payload

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qsgd/codec.hpp"

namespace qsgd {

inline constexpr std::size_t kQsgHeaderBytes = 18;

std::vector<std::uint8_t> to_qsg_bytes(const EncodedGradient& e);

/// Throws IoError (with the failing byte offset) on a bad magic, an unknown
/// scheme or norm byte, truncation, or trailing bytes.
EncodedGradient from_qsg_bytes(std::span<const std::uint8_t> bytes);

void write_qsg_file(const std::filesystem::path& path, const EncodedGradient& e);
EncodedGradient read_qsg_file(const std::filesystem::path& path);

/// Whole-file helpers shared with the command-line tool.
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace qsgd
