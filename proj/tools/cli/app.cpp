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

#include "app.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "qsgd/errors.hpp"

namespace qsgd::cli {
namespace {

struct CodecNames {
  std::string scheme;
  std::string norm = "l2";
};

void add_codec_options(CLI::App* cmd, CodecNames& names) {
  cmd->add_option("--scheme", names.scheme, "sparse or dense")
      ->check(CLI::IsMember({"sparse", "dense"}));
  cmd->add_option("--norm", names.norm, "l2 or max")->check(CLI::IsMember({"l2", "max"}));
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ostringstream buffer;
  fn(buffer);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot create " + path, 0);
  file << buffer.str();
  if (!file) throw IoError("write failed for " + path, 0);
}

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string output;
};

void add_config_args(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config,-c", args.config_path, "key = value settings file");
  cmd->add_option("--set", args.overrides, "override a setting, key=value (repeatable)");
  cmd->add_option("--seed", args.seed, "random seed (overrides the config file)");
  cmd->add_option("--output,-o", args.output, "CSV output path (default stdout)");
}

KeyValueConfig load_config(const ConfigArgs& args) {
  KeyValueConfig cfg;
  if (!args.config_path.empty()) cfg = KeyValueConfig::from_file(args.config_path);
  for (const auto& o : args.overrides) cfg.apply_override(o);
  if (args.seed) cfg.set("seed", std::to_string(*args.seed));
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantized gradient compression and training experiments", "qsgd"};
  app.require_subcommand(1);

  CompressOptions compress;
  auto* c = app.add_subcommand("compress", "quantize and encode a file of float32 values");
  c->add_option("input", compress.input, "raw little-endian float32 input")->required();
  c->add_option("--output,-o", compress.output, ".qsg output path")->required();
  c->add_option("--levels,-s", compress.levels, "quantization levels s");
  c->add_option("--bucket,-d", compress.bucket, "bucket size d");
  CodecNames compress_codec{"sparse"};
  add_codec_options(c, compress_codec);
  c->add_option("--seed", compress.seed, "random seed");
  std::string compress_stats;
  c->add_option("--stats", compress_stats, "stats CSV path (default stdout)");

  DecompressOptions decompress;
  auto* dc = app.add_subcommand("decompress", "decode a .qsg file to float32 values");
  dc->add_option("input", decompress.input, ".qsg input")->required();
  dc->add_option("--output,-o", decompress.output, "raw float32 output path")->required();
  std::string decompress_stats;
  dc->add_option("--stats", decompress_stats, "stats CSV path (default stdout)");

  BenchCodecOptions bench;
  std::string bench_out;
  auto* b = app.add_subcommand("bench-codec", "measure encoded lengths on Gaussian vectors");
  b->add_option("--n", bench.n, "vector dimension");
  b->add_option("--d", bench.d, "bucket size (default n)");
  b->add_option("--s", bench.s, "quantization levels");
  b->add_option("--trials", bench.trials, "number of random vectors");
  CodecNames bench_codec{"dense"};
  add_codec_options(b, bench_codec);
  b->add_option("--seed", bench.seed, "random seed");
  b->add_option("--slack", bench.slack, "constant standing in for o(1) terms of the bound");
  b->add_option("--output,-o", bench_out, "CSV output path (default stdout)");

  ConfigArgs train_args;
  std::string plot_path;
  auto* tr = app.add_subcommand("train", "simulated data-parallel SGD");
  add_config_args(tr, train_args);
  tr->add_option("--emit-plotdata", plot_path, "write loss vs cumulative bits CSV here");

  ConfigArgs svrg_args;
  auto* sv = app.add_subcommand("svrg", "quantized SVRG on a strongly convex finite sum");
  add_config_args(sv, svrg_args);

  GdOptions gd;
  std::string gd_out;
  auto* g = app.add_subcommand("gd", "gradient descent with the top-set quantizer");
  g->add_option("--objective", gd.objective, "objective (quadratic)");
  g->add_option("--n", gd.n, "dimension");
  g->add_option("--kappa", gd.kappa, "condition number");
  g->add_option("--eta-scale", gd.eta_scale, "c in eta = c l / (L^2 sqrt n)");
  g->add_option("--iterations", gd.iterations, "number of steps");
  g->add_option("--seed", gd.seed, "seed for the starting point");
  g->add_option("--output,-o", gd_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    compress.scheme = parse_scheme(compress_codec.scheme);
    compress.norm = parse_norm_mode(compress_codec.norm);
    bench.scheme = parse_scheme(bench_codec.scheme);
    bench.norm = parse_norm_mode(bench_codec.norm);
    if (*c) {
      with_output(compress_stats, out, [&](std::ostream& os) { cmd_compress(compress, os); });
    } else if (*dc) {
      with_output(decompress_stats, out,
                  [&](std::ostream& os) { cmd_decompress(decompress, os); });
    } else if (*b) {
      with_output(bench_out, out, [&](std::ostream& os) { cmd_bench_codec(bench, os); });
    } else if (*tr) {
      const KeyValueConfig cfg = load_config(train_args);
      with_output(train_args.output, out, [&](std::ostream& os) {
        if (plot_path.empty()) {
          cmd_train(cfg, os, nullptr);
        } else {
          std::ostringstream plot;
          cmd_train(cfg, os, &plot);
          with_output(plot_path, out, [&](std::ostream& ps) { ps << plot.str(); });
        }
      });
    } else if (*sv) {
      const KeyValueConfig cfg = load_config(svrg_args);
      with_output(svrg_args.output, out, [&](std::ostream& os) { cmd_svrg(cfg, os); });
    } else if (*g) {
      with_output(gd_out, out, [&](std::ostream& os) { cmd_gd(gd, os); });
    }
  } catch (const UsageError& e) {
    err << "qsgd: usage error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "qsgd: invalid configuration";
    if (!e.key().empty()) err << " (key '" << e.key() << "')";
    err << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "qsgd: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace qsgd::cli
