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

// Acceptance suite: one PASS/FAIL line per criterion with its runtime.
// Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qsgd/codec.hpp"
#include "qsgd/elias.hpp"
#include "qsgd/errors.hpp"
#include "qsgd/gd_quant.hpp"
#include "qsgd/problems.hpp"
#include "qsgd/qsvrg.hpp"
#include "qsgd/quantizer.hpp"
#include "qsgd/rng.hpp"
#include "qsgd/simsgd.hpp"
#include "stats.hpp"

#ifdef QSGD_HAVE_CLI
#include "app.hpp"
#include "commands.hpp"
#endif

namespace qsgd::acceptance {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_seconds;  // 0 = no limit
  std::function<Outcome()> run;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::vector<double> gaussian(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

QuantizerConfig qconfig(std::uint32_t s, std::uint32_t d, Scheme scheme) {
  QuantizerConfig q;
  q.levels = s;
  q.bucket_size = d;
  q.scheme = scheme;
  return q;
}

// 1
Outcome dense_budget() {
  constexpr std::size_t kN = 1024;
  constexpr std::size_t kTrials = 1000;
  constexpr double kBudget = 2.8 * 1024 + 32;
  const auto cfg = qconfig(32, kN, Scheme::kDense);
  const Rng root(101);
  double total = 0.0;
  for (std::size_t t = 0; t < kTrials; ++t) {
    Rng data = root.split(2 * t);
    const auto v = gaussian(kN, data);
    total += static_cast<double>(encode(quantize(v, cfg, root.split(2 * t + 1))).declared_bits);
  }
  const double mean = total / kTrials;
  return {mean <= kBudget, format("mean %.1f bits vs budget %.1f", mean, kBudget)};
}

// 2
Outcome sparse_sparsity() {
  constexpr std::size_t kN = 10000;
  constexpr std::size_t kTrials = 1000;
  constexpr double kNonzeroLimit = 101.0 * 1.05;
  const double bound = *theoretical_length_bound(kN, 1, Scheme::kSparse, 0.5);
  const auto cfg = qconfig(1, kN, Scheme::kSparse);
  const Rng root(202);
  double bits = 0.0, nonzeros = 0.0;
  for (std::size_t t = 0; t < kTrials; ++t) {
    Rng data = root.split(2 * t);
    const auto q = quantize(gaussian(kN, data), cfg, root.split(2 * t + 1));
    nonzeros += static_cast<double>(q.nonzeros());
    bits += static_cast<double>(encode(q).declared_bits);
  }
  const double mean_nz = nonzeros / kTrials;
  const double mean_bits = bits / kTrials;
  return {mean_nz <= kNonzeroLimit && mean_bits <= bound,
          format("mean nonzeros %.2f (limit %.2f), mean bits %.1f (bound %.1f)", mean_nz,
                 kNonzeroLimit, mean_bits, bound)};
}

// 3
Outcome unbiasedness() {
  constexpr std::size_t kN = 256;
  constexpr std::size_t kTrials = 100000;
  constexpr double kSigmas = 5.0;
  Rng data(303);
  const auto v = gaussian(kN, data);
  const auto cfg = qconfig(4, 64, Scheme::kSparse);
  const Rng root(304);
  oracle::RunningStats stats(kN);
  for (std::size_t t = 0; t < kTrials; ++t) stats.add(dequantize(quantize(v, cfg, root.split(t))));
  double worst = 0.0;
  for (std::size_t i = 0; i < kN; ++i) {
    const double se = stats.standard_error(i);
    const double z = se > 0 ? std::abs(stats.mean(i) - v[i]) / se
                            : (stats.mean(i) == v[i] ? 0.0 : INFINITY);
    worst = std::max(worst, z);
  }
  return {worst <= kSigmas, format("max |mean - v| = %.2f standard errors (limit %.1f)", worst,
                                   kSigmas)};
}

// 4
Outcome variance_bound() {
  constexpr double kSlack = 1.01;
  struct Case {
    std::uint32_t d, s;
    std::size_t trials;
  };
  const Case cases[] = {{16, 4, 20000}, {512, 16, 4000}, {1024, 32, 2000}};
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    Rng data(400 + c.d);
    const auto v = gaussian(c.d, data);
    const double ratio =
        empirical_variance_ratio(v, qconfig(c.s, c.d, Scheme::kDense), c.trials, Rng(401 + c.d));
    const double bound = variance_blowup(c.d, c.s);
    pass = pass && ratio <= kSlack * bound;
    detail += format("(d=%u,s=%u) %.4f <= %.4f; ", c.d, c.s, ratio, bound);
  }
  detail += format("sqrt(512)/16 = %.3f", std::sqrt(512.0) / 16.0);
  return {pass, detail};
}

std::string oracle_text(const QuantizedGradient& q, Scheme scheme) {
  std::string out;
  for (const auto& b : q.buckets) {
    oracle::TextBucket t;
    t.scale = b.scale;
    t.signs.assign(b.signs.begin(), b.signs.end());
    t.levels = b.levels;
    out += scheme == Scheme::kSparse ? oracle::sparse_text(t) : oracle::dense_text(t);
  }
  return out;
}

QuantizedGradient random_case(Rng& rng, Scheme scheme) {
  const std::size_t n = 1 + rng.index(2000);
  auto cfg = qconfig(static_cast<std::uint32_t>(1 + rng.index(64)),
                     static_cast<std::uint32_t>(1 + rng.index(n + 16)), scheme);
  cfg.norm = rng.index(2) == 0 ? NormMode::kL2 : NormMode::kMax;
  std::vector<double> v(n);
  const double scale = std::pow(10.0, static_cast<double>(rng.index(13)) - 6.0);
  for (double& x : v) x = rng.index(3) == 0 ? 0.0 : scale * rng.normal();
  return quantize(v, cfg, rng.split(1));
}

// 5
Outcome codec_round_trip() {
  constexpr std::size_t kCases = 10000;
  constexpr std::size_t kTruncations = 1000;
  Rng rng(505);
  std::size_t mismatches = 0;
  for (Scheme scheme : {Scheme::kSparse, Scheme::kDense}) {
    for (std::size_t c = 0; c < kCases; ++c) {
      const auto q = random_case(rng, scheme);
      const auto e = encode(q);
      const auto back = decode(e);
      const bool same = (scheme == Scheme::kSparse ? back == canonicalize(q) : back == q) &&
                        dequantize(back) == dequantize(q) &&
                        e.payload.to_string() == oracle_text(q, scheme);
      if (!same) ++mismatches;
    }
  }
  std::size_t silent = 0;
  for (std::size_t c = 0; c < kTruncations; ++c) {
    const Scheme scheme = c % 2 == 0 ? Scheme::kSparse : Scheme::kDense;
    auto e = encode(random_case(rng, scheme));
    e.payload.truncate(e.payload.size() - 1);
    e.declared_bits = e.payload.size();
    try {
      decode(e);
      ++silent;
    } catch (const CorruptionError&) {
    }
  }
  return {mismatches == 0 && silent == 0,
          format("%zu/%zu round-trip mismatches, %zu/%zu truncations decoded silently",
                 mismatches, 2 * kCases, silent, kTruncations)};
}

// 6
Outcome elias_correctness() {
  constexpr std::uint64_t kExhaustive = std::uint64_t{1} << 16;
  constexpr std::size_t kSamples = 100000;
  BitStream stream;
  std::size_t oracle_mismatch = 0;
  for (std::uint64_t k = 1; k <= kExhaustive; ++k) {
    const std::size_t before = stream.size();
    elias_encode(k, stream);
    if (k <= 4096) {
      BitStream alone = elias_encode(k);
      if (alone.to_string() != oracle::elias_text(k)) ++oracle_mismatch;
    }
    if (stream.size() - before != elias_length(k)) ++oracle_mismatch;
  }
  std::size_t bad = 0;
  BitReader in(stream);
  for (std::uint64_t k = 1; k <= kExhaustive; ++k) bad += elias_decode(in) != k;
  bad += !in.at_end();

  Rng rng(606);
  std::vector<std::uint64_t> sample(kSamples);
  BitStream sampled;
  for (auto& k : sample) {
    k = 1 + rng.index(1000000);
    elias_encode(k, sampled);
  }
  BitReader sin(sampled);
  for (auto k : sample) bad += elias_decode(sin) != k;

  const bool spots = elias_length(1) == 1 && elias_length(2) == 3 && elias_length(16) == 11 &&
                     elias_encode(16).to_string() == "10100100000";
  return {bad == 0 && oracle_mismatch == 0 && spots,
          format("%zu decode errors, %zu oracle mismatches, spot lengths %s", bad,
                 oracle_mismatch, spots ? "ok" : "wrong")};
}

// 7
Outcome convergence_ordering() {
  constexpr std::size_t kSeeds = 20;
  constexpr std::size_t kT = 2000;
  constexpr double kEta = 0.3;
  const auto obj = make_least_squares(1024, 128, 7, 1.0);
  const double fstar = *obj.optimal_value();
  const auto s_sqrt = static_cast<std::uint32_t>(ceil_sqrt(128));

  const auto median_loss = [&](std::optional<QuantizerConfig> q, std::size_t T) {
    std::vector<double> finals;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      RunConfig cfg;
      cfg.workers = 4;
      cfg.iterations = T;
      cfg.step = ConstantStep{kEta};
      cfg.quantizer = q;
      cfg.seed = 1000 + seed;
      cfg.eval_every = 0;
      finals.push_back(run_parallel_sgd(obj, cfg).final_loss - fstar);
    }
    return oracle::median(finals);
  };
  const double full = median_loss(std::nullopt, kT);
  const double sq = median_loss(qconfig(s_sqrt, 128, Scheme::kDense), kT);
  const double one = median_loss(qconfig(1, 128, Scheme::kDense), kT);
  const double sq2 = median_loss(qconfig(s_sqrt, 128, Scheme::kDense), 2 * kT);
  return {full <= sq && sq <= one && sq2 <= full,
          format("median suboptimality full %.5f <= s=%u %.5f <= s=1 %.5f; s=%u at 2T %.5f <= "
                 "full",
                 full, s_sqrt, sq, one, s_sqrt, sq2)};
}

// 8
Outcome qsvrg_contraction() {
  constexpr std::size_t kSeeds = 10;
  constexpr double kContraction = 0.95;
  constexpr double kR2 = 0.9;
  const auto obj = make_ridge(256, 64, 10.0, 8);
  std::vector<double> factors, r2s;
  std::uint64_t worst_bits = 0;
  double budget = 0.0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    SvrgConfig cfg;
    cfg.workers = 4;
    cfg.seed = 800 + seed;
    const auto m = run_qsvrg(obj, cfg);
    budget = qsvrg_epoch_bit_budget(obj.dim(), m.iterations);
    std::vector<double> p, logs;
    for (const auto& e : m.epochs) {
      p.push_back(static_cast<double>(e.epoch));
      logs.push_back(std::log(std::max(e.suboptimality, 1e-300)));
      worst_bits = std::max(worst_bits, e.max_worker_bits);
    }
    const auto fit = oracle::fit_line(p, logs);
    factors.push_back(std::exp(fit.slope));
    r2s.push_back(fit.r2);
  }
  const double factor = oracle::median(factors);
  const double r2 = oracle::median(r2s);
  const bool bits_ok = static_cast<double>(worst_bits) <= budget;
  return {factor <= kContraction && r2 >= kR2 && bits_ok,
          format("median contraction %.4f (<= %.2f), median R^2 %.4f (>= %.1f), max bits per "
                 "worker per epoch %llu vs budget %.1f",
                 factor, kContraction, r2, kR2, static_cast<unsigned long long>(worst_bits),
                 budget)};
}

// 9
Outcome gd_quantizer() {
  constexpr std::size_t kVectors = 10000;
  constexpr double kTol = 1e-9;
  std::size_t violations = 0, over_bound = 0, decode_errors = 0;
  Rng rng(909);
  for (std::size_t n : {10u, 100u, 1000u}) {
    const double root_n = std::sqrt(static_cast<double>(n));
    for (std::size_t t = 0; t < kVectors; ++t) {
      const auto v = gaussian(n, rng);
      const auto set = top_set(v);
      const auto q = quantize_gd(v);
      double vq = 0.0, qq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        vq += v[i] * q[i];
        qq += q[i] * q[i];
      }
      const double norm_sq = set.norm * set.norm;
      if (vq < norm_sq * (1 - kTol) || set.indices.size() > ceil_sqrt(n) ||
          qq > root_n * norm_sq * (1 + kTol)) {
        ++violations;
      }
      const auto e = encode_gd(q);
      if (static_cast<double>(e.declared_bits) > gd_length_bound(n)) ++over_bound;
      const auto back = decode_gd(e);
      for (std::size_t i = 0; i < n; ++i) {
        if ((back[i] == 0.0) != (q[i] == 0.0) || std::signbit(back[i]) != std::signbit(q[i])) {
          ++decode_errors;
          break;
        }
      }
    }
  }

  const auto obj = make_conditioned_quadratic(16, 10.0);
  Rng start(910);
  const auto x0 = gaussian(16, start);
  const auto traj = run_quantized_gd(obj, x0, max_gd_step(obj), 3000);
  std::size_t increases = 0;
  std::vector<double> t, logf;
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    if (i > 0 && traj.values[i] > traj.values[i - 1]) ++increases;
    t.push_back(static_cast<double>(i));
    logf.push_back(std::log(traj.values[i]));
  }
  const auto fit = oracle::fit_line(t, logf);
  const bool gd_ok = increases == 0 && fit.slope < 0 && fit.r2 >= 0.9;
  return {violations == 0 && over_bound == 0 && decode_errors == 0 && gd_ok,
          format("%zu property violations, %zu over length bound, %zu decode errors; GD on "
                 "kappa=10: %zu increases, log-linear slope %.2e R^2 %.4f",
                 violations, over_bound, decode_errors, increases, fit.slope, fit.r2)};
}

// 10
Outcome cli_determinism() {
#ifdef QSGD_HAVE_CLI
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qsgd_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    Rng rng(1010);
    cli::write_float32_file(dir / "input.bin", gaussian(1000, rng));
  }
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  const auto invoke = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "qsgd");
    for (auto& a : args) {
      if (a.front() == '@') a = (dir / a.substr(1)).string();
    }
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return std::to_string(code) + "\n" + out.str() + err.str();
  };

  const std::string input = (dir / "input.bin").string();
  const std::vector<std::vector<std::string>> commands = {
      {"compress", input, "-o", "@out.qsg", "--stats", "@stats.csv", "-s", "16", "--seed", "3"},
      {"decompress", "@out.qsg", "-o", "@dec.bin"},
      {"bench-codec", "--n", "512", "--s", "8", "--trials", "20", "--seed", "4"},
      {"train", "--set", "iterations=100", "--set", "quantizer=dense", "--seed", "5",
       "--emit-plotdata", "@plot.csv"},
      {"svrg", "--set", "epochs=3", "--seed", "6"},
      {"gd", "--iterations", "200", "--seed", "7"},
  };
  const char* files[] = {"out.qsg", "stats.csv", "dec.bin", "plot.csv"};
  const auto run_all = [&] {
    std::string transcript;
    for (const auto& cmd : commands) transcript += invoke(cmd) + "\x1e";
    for (const char* f : files) transcript += slurp(dir / f) + "\x1e";
    return transcript;
  };
  std::size_t failed = 0;
  const std::string first = run_all();
  for (const auto& cmd : commands) failed += invoke(cmd).rfind("0\n", 0) != 0;
  for (const char* f : files) fs::remove(dir / f);
  const std::string second = run_all();
  const bool identical = first == second;
  fs::remove_all(dir);
  return {identical && failed == 0,
          format("6 subcommands run twice: outputs and files %s, %zu nonzero exits",
                 identical ? "byte-identical" : "DIFFER", failed)};
#else
  return {false, "command-line tool not built"};
#endif
}

}  // namespace
}  // namespace qsgd::acceptance

int main() {
  using namespace qsgd::acceptance;
  const std::vector<Criterion> criteria = {
      {1, "dense-scheme length budget", 10.0, dense_budget},
      {2, "sparse-scheme sparsity and length", 30.0, sparse_sparsity},
      {3, "quantizer unbiasedness", 30.0, unbiasedness},
      {4, "quantizer variance bound", 60.0, variance_bound},
      {5, "codec round-trip and truncation", 60.0, codec_round_trip},
      {6, "Elias coding correctness", 0.0, elias_correctness},
      {7, "convex convergence ordering", 0.0, convergence_ordering},
      {8, "QSVRG contraction and bits", 0.0, qsvrg_contraction},
      {9, "GD quantizer properties", 0.0, gd_quantizer},
      {10, "CLI determinism", 0.0, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_seconds > 0 && secs > c.time_limit_seconds) {
      o.pass = false;
      o.detail += format(" [runtime limit %.0f s exceeded]", c.time_limit_seconds);
    }
    std::printf("%s [%2d] %-36s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                secs, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
