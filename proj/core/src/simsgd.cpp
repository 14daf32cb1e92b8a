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

#include "qsgd/simsgd.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "qsgd/codec.hpp"
#include "qsgd/errors.hpp"
#include "worker_pool.hpp"

namespace qsgd {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct WorkerMessage {
  DenseVector decoded;
  std::uint64_t bits = 0;
  double error_sq = 0.0;
  double gradient_sq = 0.0;
};

}  // namespace

void RunConfig::validate(const Objective& obj) const {
  if (workers < 1) throw ConfigError("workers must be >= 1", "workers");
  if (iterations < 1) throw ConfigError("iterations must be >= 1", "iterations");
  if (minibatch < 1) throw ConfigError("minibatch must be >= 1", "minibatch");
  if (!(projection_radius >= 0.0) || !std::isfinite(projection_radius)) {
    throw ConfigError("projection_radius must be >= 0", "projection_radius");
  }
  if (quantizer) quantizer->validate();
  if (x0) {
    if (x0->size() != obj.dim()) throw ConfigError("x0 has the wrong dimension", "x0");
    require_finite(*x0, "x0");
  }
  if (const auto* c = std::get_if<ConstantStep>(&step)) {
    if (!(c->eta > 0.0) || !std::isfinite(c->eta)) throw ConfigError("eta must be > 0", "eta");
  } else {
    const auto& tuned = std::get<TunedStep>(step);
    if (!(tuned.radius > 0.0) || !std::isfinite(tuned.radius)) {
      throw ConfigError("radius must be > 0", "radius");
    }
    if (tuned.sigma && (!(*tuned.sigma >= 0.0) || !std::isfinite(*tuned.sigma))) {
      throw ConfigError("sigma must be >= 0", "sigma");
    }
  }
}

std::size_t threads_from_env() {
  const char* text = std::getenv("QSGD_THREADS");
  if (text == nullptr) return 1;
  std::size_t value = 0;
  const char* end = text + std::strlen(text);
  const auto [ptr, ec] = std::from_chars(text, end, value);
  if (ec != std::errc() || ptr != end || value == 0) return 1;
  return value;
}

DenseVector minibatch_gradient(const Objective& obj, std::span<const double> x,
                               std::span<const std::size_t> indices) {
  if (indices.empty()) throw DomainError("minibatch_gradient: empty minibatch");
  DenseVector g(obj.dim(), 0.0);
  for (std::size_t i : indices) obj.add_component_gradient(i, x, 1.0, g);
  const double inv = 1.0 / static_cast<double>(indices.size());
  for (double& v : g) v *= inv;
  return g;
}

DenseVector stochastic_gradient(const Objective& obj, std::span<const double> x,
                                std::size_t minibatch, Rng& rng) {
  require_finite(x, "stochastic_gradient");
  std::vector<std::size_t> indices(minibatch);
  for (auto& i : indices) i = rng.index(obj.num_components());
  return minibatch_gradient(obj, x, indices);
}

double resolve_step(const Objective& obj, const RunConfig& cfg) {
  if (const auto* c = std::get_if<ConstantStep>(&cfg.step)) return c->eta;
  const auto& tuned = std::get<TunedStep>(cfg.step);
  double sigma = 0.0;
  if (tuned.sigma) {
    sigma = *tuned.sigma;
  } else {
    const DenseVector x0 = cfg.x0.value_or(DenseVector(obj.dim(), 0.0));
    const double b = estimate_second_moment(obj, x0, substream(Rng(cfg.seed), Stream::kProbe));
    double blowup = 0.0;
    if (cfg.quantizer && obj.dim() >= cfg.quantize_min_size) {
      const std::size_t d = std::min<std::size_t>(cfg.quantizer->bucket_size, obj.dim());
      blowup = variance_blowup(d, cfg.quantizer->levels);
    }
    sigma = std::sqrt((1.0 + blowup) * b /
                      static_cast<double>(cfg.workers * cfg.minibatch));
  }
  const double big_l = obj.smoothness();
  if (sigma == 0.0) return 1.0 / big_l;
  const double gamma =
      tuned.radius / sigma * std::sqrt(2.0 / static_cast<double>(cfg.iterations));
  return 1.0 / (big_l + 1.0 / gamma);
}

RunMetrics run_parallel_sgd(const Objective& obj, const RunConfig& cfg,
                            const StepObserver& observer) {
  cfg.validate(obj);
  const auto started = Clock::now();
  const std::size_t n = obj.dim();
  const std::size_t workers = cfg.workers;
  const std::size_t mb = cfg.minibatch;
  const std::size_t threads = cfg.threads > 0 ? cfg.threads : threads_from_env();
  const bool quantized = cfg.quantizer.has_value() && n >= cfg.quantize_min_size;

  RunMetrics out;
  out.eta = resolve_step(obj, cfg);
  const Rng root(cfg.seed);
  const Rng sample_root = substream(root, Stream::kSample);
  const Rng quantize_root = substream(root, Stream::kQuantize);

  DenseVector x = cfg.x0.value_or(DenseVector(n, 0.0));
  DenseVector x_sum = x;
  DenseVector x_bar(n);

  const auto record = [&](std::size_t t, std::uint64_t step_total) {
    for (std::size_t i = 0; i < n; ++i) x_bar[i] = x_sum[i] / static_cast<double>(t + 1);
    IterationRecord rec;
    rec.iteration = t;
    rec.loss = obj.value(x_bar);
    if (!std::isfinite(rec.loss)) {
      throw DivergenceError("loss became non-finite at iteration " + std::to_string(t), t);
    }
    rec.grad_norm = norm2(obj.gradient(x_bar));
    rec.bits_per_worker = static_cast<double>(step_total) / static_cast<double>(workers);
    rec.cumulative_bits = out.total_bits;
    rec.wall.seconds = seconds_since(started);
    out.records.push_back(rec);
  };
  record(0, 0);

  std::vector<std::size_t> indices(workers * mb);
  std::vector<WorkerMessage> messages(workers);
  DenseVector update(n);
  double error_sq = 0.0;
  double gradient_sq = 0.0;

  for (std::size_t step = 0; step < cfg.iterations; ++step) {
    Rng sampler = sample_root.split(step);
    for (auto& i : indices) i = sampler.index(obj.num_components());

    detail::for_each_worker(workers, threads, [&](std::size_t k) {
      WorkerMessage& msg = messages[k];
      const DenseVector g = minibatch_gradient(
          obj, x, std::span<const std::size_t>(indices).subspan(k * mb, mb));
      if (quantized) {
        const QuantizedGradient q =
            quantize(g, *cfg.quantizer, quantize_root.split(step).split(k));
        const EncodedGradient wire = encode(q);
        msg.bits = wire.declared_bits;
        msg.decoded = dequantize(decode(wire));
        msg.error_sq = squared_distance(msg.decoded, g);
        msg.gradient_sq = squared_norm(g);
      } else {
        msg.bits = full_precision_bits(n);
        msg.decoded = g;
      }
    });

    std::fill(update.begin(), update.end(), 0.0);
    std::uint64_t step_total = 0;
    for (const WorkerMessage& msg : messages) {
      axpy(1.0, msg.decoded, update);
      step_total += msg.bits;
      error_sq += msg.error_sq;
      gradient_sq += msg.gradient_sq;
    }
    out.messages += workers;
    out.total_bits += step_total;
    out.step_bits.push_back(step_total);

    axpy(-out.eta / static_cast<double>(workers), update, x);
    if (cfg.projection_radius > 0.0) {
      const double r = norm2(x);
      if (r > cfg.projection_radius) {
        for (double& v : x) v *= cfg.projection_radius / r;
      }
    }
    for (double v : x) {
      if (!std::isfinite(v)) {
        throw DivergenceError("iterate became non-finite at iteration " + std::to_string(step + 1),
                              step + 1);
      }
    }
    axpy(1.0, x, x_sum);
    if (observer) observer(step + 1, x);

    const std::size_t t = step + 1;
    if (t == cfg.iterations || (cfg.eval_every > 0 && t % cfg.eval_every == 0)) {
      record(t, step_total);
    }
  }

  out.final_loss = out.records.back().loss;
  out.averaged_x = x_bar;
  out.last_x = std::move(x);
  out.quantization_variance_ratio = gradient_sq > 0.0 ? error_sq / gradient_sq : 0.0;
  out.wall.seconds = seconds_since(started);
  return out;
}

NonconvexResult run_nonconvex(const Objective& obj, RunConfig cfg, double c) {
  if (!(c > 0.0)) throw ConfigError("step constant c must be > 0", "c");
  cfg.step = ConstantStep{c / obj.smoothness()};
  cfg.validate(obj);
  NonconvexResult result;
  Rng stopper = substream(Rng(cfg.seed), Stream::kStopping);
  result.stopping_index = 1 + stopper.index(cfg.iterations);
  DenseVector x_r;
  result.metrics = run_parallel_sgd(obj, cfg, [&](std::size_t t, std::span<const double> x) {
    if (t == result.stopping_index) x_r.assign(x.begin(), x.end());
  });
  result.grad_norm_sq = squared_norm(obj.gradient(x_r));
  return result;
}

double empirical_variance_ratio(std::span<const double> g, const QuantizerConfig& cfg,
                                std::size_t trials, const Rng& rng) {
  if (trials == 0) throw ConfigError("trials must be >= 1", "trials");
  const double g_sq = squared_norm(g);
  if (g_sq == 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    total += squared_distance(dequantize(quantize(g, cfg, rng.split(i))), g) / g_sq;
  }
  return total / static_cast<double>(trials);
}

double empirical_variance_ratio(const Objective& obj, std::span<const double> x,
                                const QuantizerConfig& cfg, std::size_t trials,
                                std::uint64_t seed) {
  const Rng root(seed);
  Rng probe = substream(root, Stream::kProbe);
  DenseVector g(obj.dim());
  obj.component_gradient(probe.index(obj.num_components()), x, g);
  return empirical_variance_ratio(g, cfg, trials, substream(root, Stream::kQuantize));
}

}  // namespace qsgd
