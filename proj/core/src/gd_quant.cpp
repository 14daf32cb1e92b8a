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

#include "qsgd/gd_quant.hpp"

#include <algorithm>
#include <bit>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qsgd/errors.hpp"

namespace qsgd {
namespace {

using boost::multiprecision::cpp_int;

cpp_int binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  cpp_int c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;
  }
  return c;
}

// Bits needed to write any value in [0, count).
unsigned index_width(const cpp_int& count) {
  if (count <= 1) return 0;
  return static_cast<unsigned>(boost::multiprecision::msb(cpp_int(count - 1))) + 1;
}

unsigned count_width(std::size_t n) {
  return static_cast<unsigned>(std::bit_width(ceil_sqrt(n)));
}

void push_big(const cpp_int& value, unsigned width, BitStream& out) {
  for (unsigned i = width; i-- > 0;) out.push_bit(boost::multiprecision::bit_test(value, i));
}

cpp_int read_big(BitReader& in, unsigned width) {
  cpp_int value = 0;
  for (unsigned i = 0; i < width; ++i) {
    value <<= 1;
    if (in.read_bit()) value |= 1;
  }
  return value;
}

}  // namespace

std::size_t ceil_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while (r * r < n) ++r;
  return r;
}

TopSet top_set(std::span<const double> v) {
  require_finite(v, "top_set");
  TopSet out;
  out.norm = norm2(v);
  if (out.norm == 0.0) return out;

  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(v[a]) > std::abs(v[b]);
  });

  // Relative tolerance so that exactly-balanced inputs such as (c, ..., c)
  // with n a perfect square stop at sqrt(n) despite rounding in the norm.
  const double target = out.norm * (1.0 - 1e-12);
  double sum = 0.0;
  for (std::size_t idx : order) {
    out.indices.push_back(idx);
    sum += std::abs(v[idx]);
    if (sum >= target) break;
  }
  if (out.indices.size() > ceil_sqrt(v.size())) {
    throw std::logic_error("top_set: |I(v)| exceeds ceil(sqrt(n))");
  }
  return out;
}

DenseVector quantize_gd(std::span<const double> v) {
  const TopSet set = top_set(v);
  DenseVector q(v.size(), 0.0);
  for (std::size_t i : set.indices) q[i] = v[i] < 0.0 ? -set.norm : set.norm;
  return q;
}

EncodedGradient encode_gd(std::span<const double> q) {
  require_finite(q, "encode_gd");
  if (q.empty() || q.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("encode_gd: dimension must be in [1, 2^32)");
  }
  EncodedGradient e;
  e.n = static_cast<std::uint32_t>(q.size());
  e.d = e.n;
  e.s = 0;
  e.scheme = Scheme::kTopSet;
  e.norm = NormMode::kL2;

  std::vector<std::size_t> support;
  double magnitude = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    const double a = std::abs(q[i]);
    if (!support.empty() && a != magnitude) {
      throw DomainError("encode_gd: nonzero entries must share one magnitude");
    }
    magnitude = a;
    support.push_back(i);
  }
  const std::size_t n = q.size();
  if (support.size() > ceil_sqrt(n)) {
    throw DomainError("encode_gd: more than ceil(sqrt(n)) nonzero entries");
  }

  BitStream& out = e.payload;
  out.push_bits(std::bit_cast<std::uint32_t>(round_up_to_float(magnitude)), kScaleBits);
  if (!support.empty()) {
    const std::size_t k = support.size();
    out.push_bits(k, count_width(n));
    cpp_int rank = 0;
    for (std::size_t j = 0; j < k; ++j) rank += binomial(support[j], j + 1);
    push_big(rank, index_width(binomial(n, k)), out);
    for (std::size_t i : support) out.push_bit(q[i] > 0.0);
  }
  e.declared_bits = out.size();
  return e;
}

DenseVector decode_gd(const EncodedGradient& e) {
  if (e.scheme != Scheme::kTopSet) throw CorruptionError("decode_gd: scheme mismatch");
  if (e.n == 0) throw CorruptionError("decode_gd: n must be >= 1");
  if (e.declared_bits != e.payload.size()) throw CorruptionError("decode_gd: length mismatch");
  const std::size_t n = e.n;
  BitReader in(e.payload);
  const auto norm = std::bit_cast<float>(static_cast<std::uint32_t>(in.read_bits(kScaleBits)));
  if (!std::isfinite(norm) || std::signbit(norm)) {
    throw CorruptionError("decode_gd: norm is not a finite nonnegative float");
  }
  DenseVector q(n, 0.0);
  if (norm == 0.0f) {
    if (!in.at_end()) throw CorruptionError("decode_gd: trailing bits after zero norm");
    return q;
  }

  const std::size_t k = in.read_bits(count_width(n));
  if (k == 0 || k > ceil_sqrt(n)) throw CorruptionError("decode_gd: bad support size");
  cpp_int rank = read_big(in, index_width(binomial(n, k)));
  if (rank >= binomial(n, k)) throw CorruptionError("decode_gd: subset rank out of range");

  // Greedy unranking: c_j is the largest c with C(c, j) <= remaining rank.
  std::vector<std::size_t> support(k);
  std::size_t upper = n;
  for (std::size_t j = k; j >= 1; --j) {
    std::size_t c = upper - 1;
    cpp_int coef = binomial(c, j);
    while (coef > rank) {
      // C(c-1, j) = C(c, j) (c - j) / c
      coef = coef * (c - j) / c;
      --c;
    }
    support[j - 1] = c;
    rank -= coef;
    upper = c;
  }
  for (std::size_t i : support) q[i] = in.read_bit() ? double{norm} : -double{norm};
  if (!in.at_end()) throw CorruptionError("decode_gd: trailing bits");
  return q;
}

double gd_length_bound(std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::sqrt(nn) * (std::log2(nn) + 1.0 + std::numbers::log2e) +
         static_cast<double>(kScaleBits);
}

double max_gd_step(const Objective& obj, double c) {
  const double big_l = obj.smoothness();
  return c * obj.strong_convexity() /
         (big_l * big_l * std::sqrt(static_cast<double>(obj.dim())));
}

GdTrajectory run_quantized_gd(const Objective& obj, std::span<const double> x0, double eta,
                              std::size_t iterations, bool keep_iterates) {
  if (x0.size() != obj.dim()) throw ConfigError("x0 has the wrong dimension", "x0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive", "eta");
  require_finite(x0, "x0");

  const auto fail = [eta](const std::string& why, std::size_t t) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "quantized GD diverged with eta=" << eta << ": " << why << " at iteration " << t;
    return DivergenceError(msg.str(), t);
  };

  GdTrajectory out;
  DenseVector x(x0.begin(), x0.end());
  out.values.push_back(obj.value(x));
  if (keep_iterates) out.iterates.push_back(x);
  std::size_t rising = 0;
  for (std::size_t t = 0; t < iterations; ++t) {
    const EncodedGradient msg = encode_gd(quantize_gd(obj.gradient(x)));
    out.bits.push_back(msg.declared_bits);
    axpy(-eta, decode_gd(msg), x);
    const double f = obj.value(x);
    if (!std::isfinite(f)) throw fail("non-finite objective", t + 1);
    rising = f > out.values.back() ? rising + 1 : 0;
    out.values.push_back(f);
    if (keep_iterates) out.iterates.push_back(x);
    if (rising >= 10) throw fail("objective increased on 10 consecutive steps", t + 1);
  }
  out.final_x = std::move(x);
  return out;
}

}  // namespace qsgd
