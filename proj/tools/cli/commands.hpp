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
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "qsgd/quantizer.hpp"

namespace qsgd::cli {

/// Bad invocation (missing input, empty file, ...). Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompressOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::uint32_t levels = 4;
  std::uint32_t bucket = 512;
  Scheme scheme = Scheme::kSparse;
  NormMode norm = NormMode::kL2;
  std::uint64_t seed = 0;
};

struct DecompressOptions {
  std::filesystem::path input;
  std::filesystem::path output;
};

struct BenchCodecOptions {
  std::size_t n = 1024;
  std::size_t d = 0;  // 0 = n
  std::uint32_t s = 32;
  std::size_t trials = 1000;
  Scheme scheme = Scheme::kDense;
  NormMode norm = NormMode::kL2;
  std::uint64_t seed = 0;
  double slack = 0.5;
};

struct GdOptions {
  std::string objective = "quadratic";
  std::size_t n = 16;
  double kappa = 10.0;
  double eta_scale = 0.5;
  std::size_t iterations = 200;
  std::uint64_t seed = 0;
};

/// Reads little-endian binary32 values. Throws UsageError on an empty file
/// and IoError on a length that is not a multiple of 4.
std::vector<double> read_float32_file(const std::filesystem::path& path);
void write_float32_file(const std::filesystem::path& path, const std::vector<double>& values);

// Each command writes a CSV document, '#'-prefixed metadata first, to `out`.
void cmd_compress(const CompressOptions& opts, std::ostream& out);
void cmd_decompress(const DecompressOptions& opts, std::ostream& out);
void cmd_bench_codec(const BenchCodecOptions& opts, std::ostream& out);
void cmd_train(const KeyValueConfig& cfg, std::ostream& out, std::ostream* plotdata);
void cmd_svrg(const KeyValueConfig& cfg, std::ostream& out);
void cmd_gd(const GdOptions& opts, std::ostream& out);

}  // namespace qsgd::cli
