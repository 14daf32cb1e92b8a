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

#include "commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <bit>
#include <cstring>
#include <utility>
#include <vector>

#include "qsgd/codec.hpp"
#include "qsgd/errors.hpp"
#include "qsgd/gd_quant.hpp"
#include "qsgd/problems.hpp"
#include "qsgd/qsg_file.hpp"
#include "qsgd/qsvrg.hpp"
#include "qsgd/simsgd.hpp"

namespace qsgd::cli {
namespace {

using Settings = std::vector<std::pair<std::string, std::string>>;

constexpr std::string_view kVersion = "0.1.0";

void write_metadata(std::ostream& out, std::string_view command, const Settings& settings) {
  fmt::print(out, "# qsgd {} {}\n", command, kVersion);
  for (const auto& [key, value] : settings) fmt::print(out, "# {} = {}\n", key, value);
}

std::string format_bound(const std::optional<double>& bound) {
  return bound ? fmt::format("{:.1f}", *bound) : std::string("inapplicable");
}

std::uint32_t parse_levels(const KeyValueConfig& cfg, std::size_t n) {
  const std::string text = cfg.get_string("levels", "sqrt");
  if (text == "sqrt") return static_cast<std::uint32_t>(ceil_sqrt(n));
  const std::uint64_t s = cfg.get_uint("levels", 0);
  if (s < 1 || s > kMaxLevels) throw ConfigError("levels must be in [1, 2^30] or 'sqrt'", "levels");
  return static_cast<std::uint32_t>(s);
}

std::uint32_t narrow_u32(std::uint64_t v, const char* key) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError(std::string(key) + " is too large", key);
  }
  return static_cast<std::uint32_t>(v);
}

Objective build_objective(const KeyValueConfig& cfg, Settings& resolved,
                          std::string_view fallback_kind) {
  const std::string kind = cfg.get_string("objective", std::string(fallback_kind));
  const std::uint64_t m = cfg.get_uint("m", 1024);
  const std::uint64_t n = cfg.get_uint("n", 128);
  const std::uint64_t data_seed = cfg.get_uint("data_seed", cfg.get_uint("seed", 0));
  resolved.emplace_back("objective", kind);
  resolved.emplace_back("m", std::to_string(m));
  resolved.emplace_back("n", std::to_string(n));
  resolved.emplace_back("data_seed", std::to_string(data_seed));
  if (kind == "least_squares") {
    const double noise = cfg.get_double("noise", 1.0);
    const double lambda = cfg.get_double("lambda", 0.0);
    resolved.emplace_back("noise", fmt::format("{}", noise));
    resolved.emplace_back("lambda", fmt::format("{}", lambda));
    return make_least_squares(m, n, data_seed, noise, lambda);
  }
  if (kind == "ridge") {
    const double noise = cfg.get_double("noise", 0.1);
    const double kappa = cfg.get_double("kappa", 10.0);
    resolved.emplace_back("noise", fmt::format("{}", noise));
    resolved.emplace_back("kappa", fmt::format("{}", kappa));
    return make_ridge(m, n, kappa, data_seed, noise);
  }
  if (kind == "logistic") {
    const double lambda = cfg.get_double("lambda", 1e-2);
    resolved.emplace_back("lambda", fmt::format("{}", lambda));
    return make_logistic(m, n, data_seed, lambda);
  }
  if (kind == "nonconvex") {
    const double spread = cfg.get_double("spread", 0.5);
    resolved.emplace_back("spread", fmt::format("{}", spread));
    return make_nonconvex(m, n, data_seed, spread);
  }
  throw ConfigError("unknown objective '" + kind + "'", "objective");
}

}  // namespace

std::vector<double> read_float32_file(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_binary_file(path);
  if (bytes.empty()) throw UsageError("input file " + path.string() + " is empty");
  if (bytes.size() % 4 != 0) {
    throw IoError("input length is not a multiple of 4 bytes; trailing partial float",
                  bytes.size() - bytes.size() % 4);
  }
  std::vector<double> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t word = 0;
    for (int b = 0; b < 4; ++b) word |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    values[i] = std::bit_cast<float>(word);
    if (!std::isfinite(values[i])) throw IoError("non-finite float value", 4 * i);
  }
  return values;
}

void write_float32_file(const std::filesystem::path& path, const std::vector<double>& values) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(values.size() * 4);
  for (double v : values) {
    const auto word = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(word >> (8 * b)));
  }
  write_binary_file(path, bytes);
}

void cmd_compress(const CompressOptions& opts, std::ostream& out) {
  const std::vector<double> values = read_float32_file(opts.input);
  QuantizerConfig qcfg;
  qcfg.levels = opts.levels;
  qcfg.bucket_size = opts.bucket;
  qcfg.scheme = opts.scheme;
  qcfg.norm = opts.norm;
  qcfg.seed = opts.seed;
  qcfg.validate();

  const EncodedGradient wire = encode(quantize(values, qcfg));
  write_qsg_file(opts.output, wire);

  const std::uint64_t original = full_precision_bits(values.size());
  const auto bound = bucketed_length_bound(values.size(), qcfg.bucket_size, qcfg.levels,
                                           qcfg.scheme);
  write_metadata(out, "compress",
                 {{"input", opts.input.string()},
                  {"output", opts.output.string()},
                  {"levels", std::to_string(qcfg.levels)},
                  {"bucket", std::to_string(qcfg.bucket_size)},
                  {"scheme", std::string(to_string(qcfg.scheme))},
                  {"norm", std::string(to_string(qcfg.norm))},
                  {"seed", std::to_string(qcfg.seed)}});
  fmt::print(out, "n,original_bits,compressed_bits,ratio,bound_bits\n");
  fmt::print(out, "{},{},{},{:.4f},{}\n", values.size(), original, wire.declared_bits,
             static_cast<double>(original) / static_cast<double>(wire.declared_bits),
             format_bound(bound));
}

void cmd_decompress(const DecompressOptions& opts, std::ostream& out) {
  const EncodedGradient wire = read_qsg_file(opts.input);
  const QuantizedGradient q = decode(wire);
  const bool identical = encode(q) == wire;
  if (!identical) throw CorruptionError("re-encoding the decoded gradient changed the payload");
  write_float32_file(opts.output, dequantize(q));
  write_metadata(out, "decompress",
                 {{"input", opts.input.string()}, {"output", opts.output.string()}});
  fmt::print(out, "n,levels,bucket,scheme,norm,compressed_bits,reencode_identical\n");
  fmt::print(out, "{},{},{},{},{},{},{}\n", wire.n, wire.s, wire.d, to_string(wire.scheme),
             to_string(wire.norm), wire.declared_bits, identical ? 1 : 0);
}

void cmd_bench_codec(const BenchCodecOptions& opts, std::ostream& out) {
  if (opts.trials < 1) throw ConfigError("trials must be >= 1", "trials");
  if (opts.n < 1) throw ConfigError("n must be >= 1", "n");
  QuantizerConfig qcfg;
  qcfg.levels = opts.s;
  qcfg.bucket_size = narrow_u32(opts.d == 0 ? opts.n : opts.d, "d");
  qcfg.scheme = opts.scheme;
  qcfg.norm = opts.norm;
  qcfg.seed = opts.seed;
  qcfg.validate();
  const auto bound = bucketed_length_bound(opts.n, qcfg.bucket_size, qcfg.levels, qcfg.scheme,
                                           opts.slack);

  write_metadata(out, "bench-codec",
                 {{"n", std::to_string(opts.n)},
                  {"d", std::to_string(qcfg.bucket_size)},
                  {"s", std::to_string(qcfg.levels)},
                  {"trials", std::to_string(opts.trials)},
                  {"scheme", std::string(to_string(qcfg.scheme))},
                  {"norm", std::string(to_string(qcfg.norm))},
                  {"seed", std::to_string(opts.seed)},
                  {"slack", fmt::format("{}", opts.slack)},
                  {"bound_bits", format_bound(bound)}});
  fmt::print(out, "trial,bits,nonzeros\n");

  const Rng root(opts.seed);
  const Rng data = substream(root, Stream::kData);
  const Rng quant = substream(root, Stream::kQuantize);
  std::vector<double> v(opts.n);
  double bits_sum = 0.0;
  double nnz_sum = 0.0;
  for (std::size_t t = 0; t < opts.trials; ++t) {
    Rng g = data.split(t);
    for (double& x : v) x = g.normal();
    const QuantizedGradient q = quantize(v, qcfg, quant.split(t));
    const std::uint64_t bits = encode(q).declared_bits;
    bits_sum += static_cast<double>(bits);
    nnz_sum += static_cast<double>(q.nonzeros());
    fmt::print(out, "{},{},{}\n", t, bits, q.nonzeros());
  }
  if (opts.trials > 1) {
    const double trials = static_cast<double>(opts.trials);
    fmt::print(out, "# mean_bits = {:.3f}\n", bits_sum / trials);
    fmt::print(out, "# mean_nonzeros = {:.3f}\n", nnz_sum / trials);
    if (bound) {
      fmt::print(out, "# mean_within_bound = {}\n", bits_sum / trials <= *bound ? "yes" : "no");
    }
  }
}

void cmd_train(const KeyValueConfig& cfg, std::ostream& out, std::ostream* plotdata) {
  cfg.require_known({"objective", "m", "n", "noise", "lambda", "kappa", "spread", "data_seed",
                     "workers", "iterations", "minibatch", "eta_schedule", "eta", "radius",
                     "sigma", "quantizer", "levels", "bucket", "norm", "seed",
                     "projection_radius", "quantize_min_size", "eval_every", "threads"});
  Settings resolved;
  const Objective obj = build_objective(cfg, resolved, "least_squares");

  RunConfig run;
  run.workers = cfg.get_uint("workers", 4);
  run.iterations = cfg.get_uint("iterations", 1000);
  run.minibatch = cfg.get_uint("minibatch", 1);
  run.seed = cfg.get_uint("seed", 0);
  run.projection_radius = cfg.get_double("projection_radius", 0.0);
  run.quantize_min_size = cfg.get_uint("quantize_min_size", 0);
  run.eval_every = cfg.get_uint("eval_every", 1);
  run.threads = cfg.get_uint("threads", 0);
  const std::string schedule = cfg.get_string("eta_schedule", "constant");
  if (schedule == "constant") {
    run.step = ConstantStep{cfg.get_double("eta", 0.1)};
  } else if (schedule == "tuned") {
    run.step = TunedStep{cfg.get_double("radius", 1.0), cfg.get_optional_double("sigma")};
  } else {
    throw ConfigError("eta_schedule must be 'constant' or 'tuned'", "eta_schedule");
  }
  const std::string quantizer = cfg.get_string("quantizer", "none");
  if (quantizer != "none") {
    QuantizerConfig q;
    q.scheme = parse_scheme(quantizer);
    q.levels = parse_levels(cfg, obj.dim());
    q.bucket_size = narrow_u32(cfg.get_uint("bucket", obj.dim()), "bucket");
    q.norm = parse_norm_mode(cfg.get_string("norm", "l2"));
    q.seed = run.seed;
    run.quantizer = q;
  }
  run.validate(obj);

  resolved.emplace_back("workers", std::to_string(run.workers));
  resolved.emplace_back("iterations", std::to_string(run.iterations));
  resolved.emplace_back("minibatch", std::to_string(run.minibatch));
  resolved.emplace_back("eta_schedule", schedule);
  if (const auto* c = std::get_if<ConstantStep>(&run.step)) {
    resolved.emplace_back("eta", fmt::format("{}", c->eta));
  } else {
    const auto& tuned = std::get<TunedStep>(run.step);
    resolved.emplace_back("radius", fmt::format("{}", tuned.radius));
    resolved.emplace_back("sigma", tuned.sigma ? fmt::format("{}", *tuned.sigma) : "auto");
  }
  resolved.emplace_back("quantizer", quantizer);
  if (run.quantizer) {
    resolved.emplace_back("levels", std::to_string(run.quantizer->levels));
    resolved.emplace_back("bucket", std::to_string(run.quantizer->bucket_size));
    resolved.emplace_back("norm", std::string(to_string(run.quantizer->norm)));
  }
  resolved.emplace_back("projection_radius", fmt::format("{}", run.projection_radius));
  resolved.emplace_back("quantize_min_size", std::to_string(run.quantize_min_size));
  resolved.emplace_back("eval_every", std::to_string(run.eval_every));
  resolved.emplace_back("seed", std::to_string(run.seed));

  const RunMetrics metrics = run_parallel_sgd(obj, run);
  resolved.emplace_back("resolved_eta", fmt::format("{}", metrics.eta));
  if (const auto fstar = obj.optimal_value()) {
    resolved.emplace_back("optimal_loss", fmt::format("{}", *fstar));
  }

  write_metadata(out, "train", resolved);
  fmt::print(out, "iter,loss,bits_per_worker,cumulative_bits,grad_norm\n");
  for (const IterationRecord& r : metrics.records) {
    fmt::print(out, "{},{},{},{},{}\n", r.iteration, r.loss, r.bits_per_worker,
               r.cumulative_bits, r.grad_norm);
  }
  fmt::print(out, "# total_bits = {}\n", metrics.total_bits);
  fmt::print(out, "# final_loss = {}\n", metrics.final_loss);
  fmt::print(out, "# quantization_variance_ratio = {}\n", metrics.quantization_variance_ratio);

  if (plotdata != nullptr) {
    write_metadata(*plotdata, "train plotdata", resolved);
    fmt::print(*plotdata, "cumulative_bits,loss\n");
    for (const IterationRecord& r : metrics.records) {
      fmt::print(*plotdata, "{},{}\n", r.cumulative_bits, r.loss);
    }
  }
}

void cmd_svrg(const KeyValueConfig& cfg, std::ostream& out) {
  cfg.require_known({"objective", "m", "n", "noise", "lambda", "kappa", "data_seed", "workers",
                     "epochs", "iterations", "eta", "quantize", "full_gradient_quantized",
                     "levels", "bucket", "norm", "scheme", "seed", "threads"});
  KeyValueConfig with_defaults = cfg;
  if (!cfg.has("m")) with_defaults.set("m", "256");
  if (!cfg.has("n")) with_defaults.set("n", "64");
  Settings resolved;
  const Objective obj = build_objective(with_defaults, resolved, "ridge");

  SvrgConfig svrg;
  svrg.workers = cfg.get_uint("workers", 1);
  svrg.epochs = cfg.get_uint("epochs", 10);
  svrg.iterations = cfg.get_uint("iterations", 0);
  svrg.eta = cfg.get_double("eta", 0.0);
  svrg.quantize = cfg.get_bool("quantize", true);
  svrg.full_gradient_quantized = cfg.get_bool("full_gradient_quantized", false);
  svrg.levels = cfg.get_string("levels", "sqrt") == "sqrt"
                    ? 0
                    : narrow_u32(cfg.get_uint("levels", 0), "levels");
  svrg.bucket_size = narrow_u32(cfg.get_uint("bucket", 0), "bucket");
  svrg.norm = parse_norm_mode(cfg.get_string("norm", "l2"));
  svrg.scheme = parse_scheme(cfg.get_string("scheme", "dense"));
  svrg.seed = cfg.get_uint("seed", 0);
  svrg.threads = cfg.get_uint("threads", 0);

  const SvrgMetrics metrics = run_qsvrg(obj, svrg);
  const QuantizerConfig q = svrg.resolved_quantizer(obj);
  resolved.emplace_back("workers", std::to_string(svrg.workers));
  resolved.emplace_back("epochs", std::to_string(svrg.epochs));
  resolved.emplace_back("iterations", std::to_string(metrics.iterations));
  resolved.emplace_back("eta", fmt::format("{}", metrics.eta));
  resolved.emplace_back("quantize", svrg.quantize ? "true" : "false");
  resolved.emplace_back("full_gradient_quantized", svrg.full_gradient_quantized ? "true" : "false");
  resolved.emplace_back("levels", std::to_string(q.levels));
  resolved.emplace_back("bucket", std::to_string(q.bucket_size));
  resolved.emplace_back("norm", std::string(to_string(q.norm)));
  resolved.emplace_back("scheme", std::string(to_string(q.scheme)));
  resolved.emplace_back("seed", std::to_string(svrg.seed));
  resolved.emplace_back("optimal_loss", fmt::format("{}", metrics.optimal_value));
  resolved.emplace_back("bit_budget_per_epoch",
                        fmt::format("{:.1f}", qsvrg_epoch_bit_budget(obj.dim(), metrics.iterations)));

  write_metadata(out, "svrg", resolved);
  fmt::print(out, "epoch,suboptimality,bits_per_worker_epoch\n");
  for (const EpochRecord& e : metrics.epochs) {
    fmt::print(out, "{},{},{}\n", e.epoch, e.suboptimality, e.max_worker_bits);
  }
}

void cmd_gd(const GdOptions& opts, std::ostream& out) {
  if (opts.objective != "quadratic") {
    throw ConfigError("gd supports --objective quadratic only", "objective");
  }
  if (opts.n < 1) throw ConfigError("n must be >= 1", "n");
  if (!(opts.eta_scale > 0.0)) throw ConfigError("eta-scale must be > 0", "eta-scale");
  const Objective obj = make_conditioned_quadratic(opts.n, opts.kappa);
  const double eta = max_gd_step(obj, opts.eta_scale);
  DenseVector x0(opts.n);
  Rng rng = substream(Rng(opts.seed), Stream::kData);
  for (double& v : x0) v = rng.normal();

  const GdTrajectory traj = run_quantized_gd(obj, x0, eta, opts.iterations);
  write_metadata(out, "gd",
                 {{"objective", opts.objective},
                  {"n", std::to_string(opts.n)},
                  {"kappa", fmt::format("{}", opts.kappa)},
                  {"eta_scale", fmt::format("{}", opts.eta_scale)},
                  {"eta", fmt::format("{}", eta)},
                  {"iterations", std::to_string(opts.iterations)},
                  {"seed", std::to_string(opts.seed)},
                  {"bit_bound_per_step", fmt::format("{:.3f}", gd_length_bound(opts.n))}});
  fmt::print(out, "iteration,f,bits\n");
  for (std::size_t t = 0; t < traj.values.size(); ++t) {
    fmt::print(out, "{},{},{}\n", t, traj.values[t], t == 0 ? 0 : traj.bits[t - 1]);
  }
}

}  // namespace qsgd::cli
