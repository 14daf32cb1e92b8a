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

#include <span>
#include <string_view>
#include <vector>

namespace qsgd {

/// Real-valued gradient or parameter vector.
using DenseVector = std::vector<double>;

/// Throws DomainError naming `what` if any component is NaN or infinite.
void require_finite(std::span<const double> v, std::string_view what);

/// Euclidean norm, computed with scaling so tiny or huge components neither
/// underflow nor overflow.
double norm2(std::span<const double> v);
double squared_norm(std::span<const double> v);
double max_abs(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Round x >= 0 to the nearest binary32 value that is not smaller than x.
/// Throws DomainError if x exceeds the binary32 range.
float round_up_to_float(double x);

}  // namespace qsgd
