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

#include "qsgd/qsg_file.hpp"

#include <array>
#include <fstream>
#include <iterator>
#include <string>

#include "qsgd/errors.hpp"

namespace qsgd {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'Q', 'S', 'G', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[offset + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> to_qsg_bytes(const EncodedGradient& e) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put_u32(out, e.n);
  put_u32(out, e.d);
  put_u32(out, e.s);
  out.push_back(static_cast<std::uint8_t>(e.scheme));
  out.push_back(static_cast<std::uint8_t>(e.norm));
  const auto body = e.payload.serialize();
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

EncodedGradient from_qsg_bytes(std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < kMagic.size(); ++i) {
    if (i >= bytes.size()) throw IoError("truncated magic", bytes.size());
    if (bytes[i] != kMagic[i]) throw IoError("bad magic, not a .qsg file", i);
  }
  if (bytes.size() < kQsgHeaderBytes) throw IoError("truncated header", bytes.size());

  EncodedGradient e;
  e.n = get_u32(bytes, 4);
  e.d = get_u32(bytes, 8);
  e.s = get_u32(bytes, 12);
  if (bytes[16] > static_cast<std::uint8_t>(Scheme::kDense)) {
    throw IoError("unknown scheme byte " + std::to_string(bytes[16]), 16);
  }
  e.scheme = static_cast<Scheme>(bytes[16]);
  if (bytes[17] > static_cast<std::uint8_t>(NormMode::kMax)) {
    throw IoError("unknown norm byte " + std::to_string(bytes[17]), 17);
  }
  e.norm = static_cast<NormMode>(bytes[17]);

  std::size_t consumed = 0;
  try {
    e.payload = BitStream::deserialize(bytes.subspan(kQsgHeaderBytes), &consumed);
  } catch (const CorruptionError& err) {
    throw IoError(std::string("bad payload: ") + err.what(), bytes.size());
  }
  const std::size_t end = kQsgHeaderBytes + consumed;
  if (end != bytes.size()) throw IoError("trailing bytes after payload", end);
  e.declared_bits = e.payload.size();
  return e;
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string(), 0);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string(), bytes.size());
  return bytes;
}

void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string(), 0);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string(), 0);
}

void write_qsg_file(const std::filesystem::path& path, const EncodedGradient& e) {
  write_binary_file(path, to_qsg_bytes(e));
}

EncodedGradient read_qsg_file(const std::filesystem::path& path) {
  return from_qsg_bytes(read_binary_file(path));
}

}  // namespace qsgd
