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
#include <stdexcept>
#include <string>
#include <utility>

namespace qsgd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside an operation's mathematical domain (NaN gradient, k = 0 for
/// Elias, a ratio outside [0, 1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A wire payload that cannot be decoded. Never a silent misdecode.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// The stream ended in the middle of a code.
class TruncationError : public CorruptionError {
 public:
  using CorruptionError::CorruptionError;
};

/// Invalid run or quantizer configuration. `key()` names the offending
/// setting when one is known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string key = {})
      : Error(message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A training loop blew up (non-finite loss or sustained increase).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::size_t iteration)
      : Error(message), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// File-level failure; carries the byte offset where reading stopped.
class IoError : public Error {
 public:
  IoError(const std::string& message, std::uint64_t offset)
      : Error(message + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace qsgd
