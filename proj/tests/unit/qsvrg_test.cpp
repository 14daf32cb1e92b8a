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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qsgd/errors.hpp"
#include "qsgd/problems.hpp"
#include "qsgd/qsvrg.hpp"
#include "stats.hpp"

namespace qsgd {
namespace {

// Textbook SVRG with K workers averaging unquantized corrections.
std::vector<double> reference_svrg(const Objective& obj, std::size_t workers, std::size_t epochs,
                                   std::size_t T, double eta, std::uint64_t seed,
                                   std::vector<double>* values) {
  const std::size_t n = obj.dim();
  const std::size_t m = obj.num_components();
  const std::size_t block = m / workers;
  std::vector<double> y(n, 0.0);
  values->push_back(obj.value(y));
  for (std::size_t p = 0; p < epochs; ++p) {
    std::vector<double> mu(n, 0.0);
    for (std::size_t k = 0; k < workers; ++k) {
      const auto h = obj.partial_gradient(k * block, (k + 1) * block, y);
      for (std::size_t i = 0; i < n; ++i) mu[i] += 1.0 * h[i];
    }
    std::vector<double> x = y;
    std::vector<double> sum(n, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < n; ++i) sum[i] += 1.0 * x[i];
      Rng sampler = Rng(seed).split(1).split(p).split(t);
      std::vector<double> step(n, 0.0);
      for (std::size_t k = 0; k < workers; ++k) {
        const std::size_t j = sampler.index(m);
        std::vector<double> gx(n), gy(n);
        obj.component_gradient(j, x, gx);
        obj.component_gradient(j, y, gy);
        for (std::size_t i = 0; i < n; ++i) step[i] += 1.0 * (gx[i] - gy[i] + mu[i]);
      }
      const double scale = -eta / static_cast<double>(workers);
      for (std::size_t i = 0; i < n; ++i) x[i] += scale * step[i];
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = sum[i] / static_cast<double>(T);
    values->push_back(obj.value(y));
  }
  return y;
}

TEST(Qsvrg, Defaults) {
  const auto obj = make_ridge(256, 64, 10.0, 1);
  SvrgConfig cfg;
  EXPECT_EQ(cfg.resolved_iterations(obj), 200u);
  EXPECT_DOUBLE_EQ(cfg.resolved_eta(obj), 0.1 / obj.component_smoothness());
  const auto q = cfg.resolved_quantizer(obj);
  EXPECT_EQ(q.levels, 8u);
  EXPECT_EQ(q.bucket_size, 64u);
  EXPECT_EQ(q.scheme, Scheme::kDense);
  EXPECT_DOUBLE_EQ(qsvrg_epoch_bit_budget(64, 200), (32 + 2.8 * 64) * 201 + 32 * 64);
}

TEST(Qsvrg, UnquantizedMatchesReferenceBitForBit) {
  const auto obj = make_ridge(128, 16, 5.0, 2);
  SvrgConfig cfg;
  cfg.workers = 4;
  cfg.epochs = 4;
  cfg.iterations = 30;
  cfg.quantize = false;
  cfg.seed = 3;
  const auto m = run_qsvrg(obj, cfg);
  std::vector<double> values;
  const auto y = reference_svrg(obj, 4, 4, 30, m.eta, 3, &values);
  EXPECT_EQ(m.y, y);
  ASSERT_EQ(m.epochs.size(), values.size());
  for (std::size_t p = 0; p < values.size(); ++p) EXPECT_EQ(m.epochs[p].value, values[p]) << p;
  // Snapshot and updates are all full precision.
  EXPECT_EQ(m.epochs[1].worker_bits[0], 32u * 16u * 31u);
}

TEST(Qsvrg, OptimumIsFixedPoint) {
  const auto obj = make_ridge(64, 8, 10.0, 4);
  SvrgConfig cfg;
  cfg.workers = 2;
  cfg.epochs = 3;
  cfg.x0 = *obj.optimum();
  const auto m = run_qsvrg(obj, cfg);
  for (const auto& e : m.epochs) EXPECT_LE(std::abs(e.suboptimality), 1e-12) << e.epoch;
}

TEST(Qsvrg, BitAccounting) {
  const auto obj = make_ridge(96, 12, 8.0, 5);
  SvrgConfig cfg;
  cfg.workers = 3;
  cfg.epochs = 3;
  cfg.iterations = 40;
  cfg.seed = 6;
  const auto m = run_qsvrg(obj, cfg);
  std::uint64_t total = 0;
  for (const auto& e : m.epochs) {
    ASSERT_EQ(e.worker_bits.size(), 3u);
    std::uint64_t max = 0;
    for (auto b : e.worker_bits) {
      total += b;
      max = std::max(max, b);
      if (e.epoch > 0) EXPECT_GT(b, 32u * 12u + 40u * 32u);
    }
    EXPECT_EQ(e.max_worker_bits, max);
  }
  EXPECT_EQ(m.total_bits, total);

  // Replay worker 1 of the first epoch.
  std::uint64_t replay = full_precision_bits(12);
  const auto y = std::vector<double>(12, 0.0);
  std::vector<double> mu(12, 0.0);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto h = obj.partial_gradient(k * 32, (k + 1) * 32, y);
    for (std::size_t i = 0; i < 12; ++i) mu[i] += h[i];
  }
  const auto q = cfg.resolved_quantizer(obj);
  std::vector<double> x = y;
  const Rng root(6);
  for (std::size_t t = 0; t < 40; ++t) {
    Rng sampler = root.split(1).split(0).split(t);
    std::vector<double> step(12, 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
      std::uint64_t bits = 0;
      const auto u = qsvrg_worker_update(obj, x, y, mu, sampler.index(96), q,
                                         root.split(2).split(0).split(t).split(k), &bits);
      if (k == 1) replay += bits;
      for (std::size_t i = 0; i < 12; ++i) step[i] += u[i];
    }
    for (std::size_t i = 0; i < 12; ++i) x[i] += -m.eta / 3.0 * step[i];
  }
  EXPECT_EQ(m.epochs[1].worker_bits[1], replay);
}

TEST(Qsvrg, QuantizedSnapshotChangesOnlyTheEpochStart) {
  const auto obj = make_ridge(64, 16, 6.0, 7);
  SvrgConfig cfg;
  cfg.workers = 2;
  cfg.epochs = 2;
  cfg.iterations = 20;
  cfg.full_gradient_quantized = true;
  const auto m = run_qsvrg(obj, cfg);
  cfg.full_gradient_quantized = false;
  const auto plain = run_qsvrg(obj, cfg);
  EXPECT_LT(m.epochs[1].worker_bits[0], plain.epochs[1].worker_bits[0]);
  EXPECT_LT(m.epochs.back().suboptimality, m.epochs.front().suboptimality);
}

TEST(Qsvrg, UpdateIsUnbiased) {
  const auto obj = make_ridge(40, 6, 5.0, 8);
  Rng g(9);
  std::vector<double> x(6), y(6);
  for (double& v : x) v = g.normal();
  for (double& v : y) v = g.normal();
  const auto mu = obj.gradient(y);
  const auto target = obj.gradient(x);
  SvrgConfig cfg;
  const auto q = cfg.resolved_quantizer(obj);
  oracle::RunningStats stats(6);
  const Rng root(10);
  for (std::size_t t = 0; t < 50000; ++t) {
    Rng pick = root.split(2 * t);
    stats.add(qsvrg_worker_update(obj, x, y, mu, pick.index(40), q, root.split(2 * t + 1)));
  }
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_LE(std::abs(stats.mean(i) - target[i]), 5 * stats.standard_error(i)) << i;
  }
}

TEST(Qsvrg, GeometricDecreaseOnRidge) {
  const auto obj = make_ridge(256, 64, 10.0, 11);
  SvrgConfig cfg;
  cfg.workers = 4;
  cfg.epochs = 6;
  cfg.seed = 12;
  const auto m = run_qsvrg(obj, cfg);
  std::vector<double> p, logs;
  for (const auto& e : m.epochs) {
    ASSERT_GT(e.suboptimality, 0.0);
    p.push_back(static_cast<double>(e.epoch));
    logs.push_back(std::log(e.suboptimality));
  }
  for (std::size_t i = 1; i < logs.size(); ++i) EXPECT_LT(logs[i], logs[i - 1]) << i;
  const auto fit = oracle::fit_line(p, logs);
  EXPECT_LT(fit.slope, std::log(0.95));
  EXPECT_GE(fit.r2, 0.9);
}

TEST(Qsvrg, DeterministicAndThreadInvariant) {
  const auto obj = make_ridge(64, 16, 6.0, 13);
  SvrgConfig cfg;
  cfg.workers = 4;
  cfg.epochs = 2;
  cfg.iterations = 25;
  cfg.threads = 1;
  const auto a = run_qsvrg(obj, cfg);
  EXPECT_EQ(run_qsvrg(obj, cfg), a);
  cfg.threads = 3;
  EXPECT_EQ(run_qsvrg(obj, cfg), a);
}

std::string config_key(const Objective& obj, const SvrgConfig& cfg) {
  try {
    run_qsvrg(obj, cfg);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

TEST(Qsvrg, ConfigErrors) {
  const auto ridge = make_ridge(60, 8, 5.0, 14);
  SvrgConfig cfg;
  cfg.workers = 7;
  EXPECT_EQ(config_key(ridge, cfg), "workers");
  cfg = SvrgConfig{};
  cfg.eta = 2.0 / ridge.component_smoothness();
  EXPECT_EQ(config_key(ridge, cfg), "eta");
  cfg = SvrgConfig{};
  cfg.epochs = 0;
  EXPECT_EQ(config_key(ridge, cfg), "epochs");
  EXPECT_EQ(config_key(make_nonconvex(20, 4, 15), SvrgConfig{}), "objective");
  // Plain least squares with more unknowns than rows has l = 0.
  EXPECT_EQ(config_key(make_least_squares(4, 8, 16), SvrgConfig{}), "objective");
}

}  // namespace
}  // namespace qsgd
