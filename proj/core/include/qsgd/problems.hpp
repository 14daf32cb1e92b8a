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

// Synthetic problem generators. All randomness comes from
// Rng(seed).split(Stream::kData).

#include <cstddef>
#include <cstdint>
#include <span>

#include "qsgd/objective.hpp"

namespace qsgd {

/// Gaussian design, b = A x_true + noise * N(0, 1).
Objective make_least_squares(std::size_t m, std::size_t n, std::uint64_t seed,
                             double noise = 0.1, double lambda = 0.0);

/// Least squares with anisotropic columns and lambda chosen so that
/// component_smoothness() / strong_convexity() == kappa.
Objective make_ridge(std::size_t m, std::size_t n, double kappa, std::uint64_t seed,
                     double noise = 0.1);

/// f(x) = 1/2 sum_k c_k x_k^2, written as n least-squares components.
Objective make_diagonal_quadratic(std::span<const double> coeffs);

/// Diagonal quadratic with curvatures evenly spaced in [1, kappa].
Objective make_conditioned_quadratic(std::size_t n, double kappa);

/// Labels from a random linear separator with 10% label flips.
Objective make_logistic(std::size_t m, std::size_t n, std::uint64_t seed, double lambda = 1e-2);

/// Curvatures 1 + e_ik with e clipped to [-spread, spread] and centred per
/// column, so f(x) = sum_k (x_k^2 + 1/2 cos(3 x_k)) while the components differ.
Objective make_nonconvex(std::size_t m, std::size_t n, std::uint64_t seed, double spread = 0.5);

}  // namespace qsgd
