// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "avatar/decorator.hpp"
#include "avatar/network.hpp"
#include "avatar/parallel.hpp"
#include "avatar/wct.hpp"

namespace {

using namespace avatar;

FeatureMap noise(int h, int w, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  FeatureMap m(h, w, c);
  for (auto& v : m.values()) v = u(rng);
  return m;
}

// Args: spatial side, in channels, out channels.
void BM_Conv3x3(benchmark::State& state) {
  set_num_threads(1);
  const int side = static_cast<int>(state.range(0));
  const int in = static_cast<int>(state.range(1));
  const int out = static_cast<int>(state.range(2));
  const FeatureMap x = noise(side, side, in, 1);
  const FeatureMap w = noise(1, 1, 9 * in * out, 2);
  const PackedConv k(ConvKernel(3, 3, in, out, {w.values().begin(), w.values().end()},
                                std::vector<float>(out, 0.0f)));
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, k, 1, PaddingSpec::reflect(1)));
  state.counters["GFLOP/s"] = benchmark::Counter(
      2.0 * 9 * in * out * side * side * state.iterations(), benchmark::Counter::kIsRate,
      benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Conv3x3)
    ->Args({256, 3, 64})
    ->Args({256, 64, 64})
    ->Args({128, 128, 128})
    ->Args({64, 256, 256})
    ->Args({32, 256, 512})
    ->Unit(benchmark::kMillisecond);

// Args: bottleneck side, channels, patch size.
void BM_MatchPatches(benchmark::State& state) {
  set_num_threads(1);
  const int side = static_cast<int>(state.range(0));
  const int c = static_cast<int>(state.range(1));
  const int p = static_cast<int>(state.range(2));
  const FeatureMap content = noise(side, side, c, 3);
  const StyleKernel kernel(noise(side, side, c, 4), p, 1);
  for (auto _ : state) benchmark::DoNotOptimize(match_patches(content, kernel));
}
BENCHMARK(BM_MatchPatches)->Args({32, 512, 3})->Args({32, 512, 5})->Unit(benchmark::kMillisecond);

void BM_FitZca(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const FeatureMap f = noise(32, 32, c, 5);
  for (auto _ : state) benchmark::DoNotOptimize(fit_transform(f, TransformFlavor::ZcaCov));
}
BENCHMARK(BM_FitZca)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Stylize256(benchmark::State& state) {
  set_num_threads(static_cast<int>(state.range(0)));
  const Network net(make_random_weights({}));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image img(256, 256, 3);
  for (auto& v : img.values()) v = u(rng);
  const auto style = net.encode(img);
  for (auto _ : state) {
    const auto enc = net.encode(img);
    DecoratorConfig cfg;
    cfg.flavor = TransformFlavor::AdaIN;
    const auto z = style_decorate(enc.bottleneck, style.bottleneck, cfg);
    benchmark::DoNotOptimize(net.decode(z, style.skips));
  }
}
BENCHMARK(BM_Stylize256)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();
