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

#include <benchmark/benchmark.h>

#include <vector>

#include "qsgd/codec.hpp"
#include "qsgd/elias.hpp"
#include "qsgd/quantizer.hpp"
#include "qsgd/rng.hpp"

namespace {

std::vector<double> gaussian(std::size_t n) {
  qsgd::Rng rng(1);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

qsgd::QuantizerConfig config(std::int64_t s, qsgd::Scheme scheme) {
  qsgd::QuantizerConfig cfg;
  cfg.levels = static_cast<std::uint32_t>(s);
  cfg.bucket_size = 512;
  cfg.scheme = scheme;
  return cfg;
}

void BM_Quantize(benchmark::State& state) {
  const auto v = gaussian(static_cast<std::size_t>(state.range(0)));
  const auto cfg = config(state.range(1), qsgd::Scheme::kSparse);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qsgd::quantize(v, cfg, qsgd::Rng(seed++)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Quantize)->Args({1 << 16, 4})->Args({1 << 16, 256});

void BM_Encode(benchmark::State& state, qsgd::Scheme scheme) {
  const auto v = gaussian(static_cast<std::size_t>(state.range(0)));
  const auto q = qsgd::quantize(v, config(state.range(1), scheme));
  for (auto _ : state) benchmark::DoNotOptimize(qsgd::encode(q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_Encode, sparse, qsgd::Scheme::kSparse)->Args({1 << 16, 4});
BENCHMARK_CAPTURE(BM_Encode, dense, qsgd::Scheme::kDense)->Args({1 << 16, 16});

void BM_Decode(benchmark::State& state, qsgd::Scheme scheme) {
  const auto v = gaussian(static_cast<std::size_t>(state.range(0)));
  const auto e = qsgd::encode(qsgd::quantize(v, config(state.range(1), scheme)));
  for (auto _ : state) benchmark::DoNotOptimize(qsgd::decode(e));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_Decode, sparse, qsgd::Scheme::kSparse)->Args({1 << 16, 4});
BENCHMARK_CAPTURE(BM_Decode, dense, qsgd::Scheme::kDense)->Args({1 << 16, 16});

void BM_EliasRoundTrip(benchmark::State& state) {
  const auto max = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    qsgd::BitStream out;
    for (std::uint64_t k = 1; k <= max; ++k) qsgd::elias_encode(k, out);
    qsgd::BitReader in(out);
    std::uint64_t sum = 0;
    for (std::uint64_t k = 1; k <= max; ++k) sum += qsgd::elias_decode(in);
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EliasRoundTrip)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
