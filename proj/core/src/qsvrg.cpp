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

#include "qsgd/qsvrg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "qsgd/codec.hpp"
#include "qsgd/errors.hpp"
#include "qsgd/gd_quant.hpp"
#include "worker_pool.hpp"

namespace qsgd {

void SvrgConfig::validate(const Objective& obj) const {
  if (workers < 1) throw ConfigError("workers must be >= 1", "workers");
  if (epochs < 1) throw ConfigError("epochs must be >= 1", "epochs");
  if (obj.num_components() % workers != 0) {
    throw ConfigError("number of components m=" + std::to_string(obj.num_components()) +
                          " is not divisible by workers=" + std::to_string(workers),
                      "workers");
  }
  if (!(obj.strong_convexity() > 0.0)) {
    throw ConfigError("QSVRG needs a strongly convex objective (l > 0)", "objective");
  }
  if (!obj.optimal_value()) throw ConfigError("objective optimum is unknown", "objective");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be >= 0", "eta");
  if (resolved_eta(obj) * obj.component_smoothness() > 1.0) {
    throw ConfigError("eta * L must be <= 1", "eta");
  }
  if (x0) {
    if (x0->size() != obj.dim()) throw ConfigError("x0 has the wrong dimension", "x0");
    require_finite(*x0, "x0");
  }
  if (quantize || full_gradient_quantized) resolved_quantizer(obj).validate();
}

std::size_t SvrgConfig::resolved_iterations(const Objective& obj) const {
  if (iterations > 0) return iterations;
  return static_cast<std::size_t>(
      std::ceil(20.0 * obj.component_smoothness() / obj.strong_convexity() * (1.0 - 1e-12)));
}

double SvrgConfig::resolved_eta(const Objective& obj) const {
  return eta > 0.0 ? eta : 0.1 / obj.component_smoothness();
}

QuantizerConfig SvrgConfig::resolved_quantizer(const Objective& obj) const {
  QuantizerConfig q;
  q.levels = levels > 0 ? levels : static_cast<std::uint32_t>(ceil_sqrt(obj.dim()));
  q.bucket_size = bucket_size > 0 ? bucket_size : static_cast<std::uint32_t>(obj.dim());
  q.norm = norm;
  q.scheme = scheme;
  q.seed = seed;
  return q;
}

double qsvrg_epoch_bit_budget(std::size_t n, std::size_t iterations) {
  const double nn = static_cast<double>(n);
  return (32.0 + 2.8 * nn) * static_cast<double>(iterations + 1) + 32.0 * nn;
}

namespace {

DenseVector transmit(DenseVector v, const std::optional<QuantizerConfig>& quantizer,
                     const Rng& rng, std::uint64_t* bits) {
  if (!quantizer) {
    if (bits) *bits = full_precision_bits(v.size());
    return v;
  }
  const EncodedGradient wire = encode(quantize(v, *quantizer, rng));
  if (bits) *bits = wire.declared_bits;
  return dequantize(decode(wire));
}

}  // namespace

DenseVector qsvrg_worker_update(const Objective& obj, std::span<const double> x,
                                std::span<const double> y, std::span<const double> mu,
                                std::size_t j, const std::optional<QuantizerConfig>& quantizer,
                                const Rng& rng, std::uint64_t* bits) {
  const std::size_t n = obj.dim();
  DenseVector gx(n);
  DenseVector gy(n);
  obj.component_gradient(j, x, gx);
  obj.component_gradient(j, y, gy);
  DenseVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = gx[i] - gy[i] + mu[i];
  return transmit(std::move(v), quantizer, rng, bits);
}

SvrgMetrics run_qsvrg(const Objective& obj, const SvrgConfig& cfg) {
  cfg.validate(obj);
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = obj.dim();
  const std::size_t m = obj.num_components();
  const std::size_t workers = cfg.workers;
  const std::size_t block = m / workers;
  const std::size_t threads = cfg.threads > 0 ? cfg.threads : threads_from_env();

  SvrgMetrics out;
  out.iterations = cfg.resolved_iterations(obj);
  out.eta = cfg.resolved_eta(obj);
  out.optimal_value = *obj.optimal_value();
  const QuantizerConfig qcfg = cfg.resolved_quantizer(obj);
  out.levels = qcfg.levels;
  const std::optional<QuantizerConfig> update_q =
      cfg.quantize ? std::optional(qcfg) : std::nullopt;
  const std::optional<QuantizerConfig> snapshot_q =
      cfg.full_gradient_quantized ? std::optional(qcfg) : std::nullopt;

  const Rng root(cfg.seed);
  const Rng sample_root = substream(root, Stream::kSample);
  const Rng quantize_root = substream(root, Stream::kQuantize);
  const Rng snapshot_root = substream(root, Stream::kFullGradient);

  DenseVector y = cfg.x0.value_or(DenseVector(n, 0.0));
  const auto record = [&](std::size_t p, std::vector<std::uint64_t> bits) {
    EpochRecord rec;
    rec.epoch = p;
    rec.value = obj.value(y);
    if (!std::isfinite(rec.value)) {
      throw DivergenceError("objective became non-finite in epoch " + std::to_string(p), p);
    }
    rec.suboptimality = rec.value - out.optimal_value;
    for (std::uint64_t b : bits) rec.max_worker_bits = std::max(rec.max_worker_bits, b);
    rec.worker_bits = std::move(bits);
    rec.wall.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out.epochs.push_back(std::move(rec));
  };
  record(0, std::vector<std::uint64_t>(workers, 0));

  std::vector<DenseVector> messages(workers);
  std::vector<std::uint64_t> message_bits(workers);
  std::vector<std::size_t> picks(workers);
  DenseVector x(n);
  DenseVector x_sum(n);
  DenseVector update(n);

  for (std::size_t p = 0; p < cfg.epochs; ++p) {
    std::vector<std::uint64_t> epoch_bits(workers, 0);

    detail::for_each_worker(workers, threads, [&](std::size_t k) {
      messages[k] = transmit(obj.partial_gradient(k * block, (k + 1) * block, y), snapshot_q,
                             snapshot_root.split(p).split(k), &message_bits[k]);
    });
    DenseVector mu(n, 0.0);
    for (std::size_t k = 0; k < workers; ++k) {
      axpy(1.0, messages[k], mu);
      epoch_bits[k] += message_bits[k];
    }

    x = y;
    std::fill(x_sum.begin(), x_sum.end(), 0.0);
    for (std::size_t t = 0; t < out.iterations; ++t) {
      axpy(1.0, x, x_sum);
      Rng sampler = sample_root.split(p).split(t);
      for (auto& j : picks) j = sampler.index(m);
      detail::for_each_worker(workers, threads, [&](std::size_t k) {
        messages[k] = qsvrg_worker_update(obj, x, y, mu, picks[k], update_q,
                                          quantize_root.split(p).split(t).split(k),
                                          &message_bits[k]);
      });
      std::fill(update.begin(), update.end(), 0.0);
      for (std::size_t k = 0; k < workers; ++k) {
        axpy(1.0, messages[k], update);
        epoch_bits[k] += message_bits[k];
      }
      axpy(-out.eta / static_cast<double>(workers), update, x);
      for (double v : x) {
        if (!std::isfinite(v)) {
          throw DivergenceError("iterate became non-finite in epoch " + std::to_string(p + 1),
                                p + 1);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = x_sum[i] / static_cast<double>(out.iterations);
    for (std::uint64_t b : epoch_bits) out.total_bits += b;
    record(p + 1, std::move(epoch_bits));
  }
  out.y = std::move(y);
  return out;
}

}  // namespace qsgd
