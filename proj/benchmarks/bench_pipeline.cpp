#include <benchmark/benchmark.h>

#include "chf/autoencoder.hpp"
#include "chf/dataset.hpp"
#include "chf/lut.hpp"
#include "chf/network.hpp"
#include "chf/rng.hpp"

namespace {

using namespace chf;

LutGrid benchmark_grid() {
  Rng rng(101);
  auto axis = [&](std::size_t n, double lo, double step) {
    std::vector<double> a{lo};
    for (std::size_t i = 1; i < n; ++i) a.push_back(a.back() + step);
    return a;
  };
  std::vector<double> chf(15 * 21 * 23);
  for (double& v : chf) v = rng.uniform(0.0, 4e4);
  return LutGrid(axis(15, 0.1, 1.5), axis(21, 0.0, 400.0),
                 axis(23, -0.5, 0.065), std::move(chf));
}

void BM_interpolate(benchmark::State& state) {
  const LutGrid grid = benchmark_grid();
  Rng rng(7);
  std::vector<std::array<double, 3>> queries(1024);
  for (auto& q : queries) {
    q = {rng.uniform(0.1, 21.0), rng.uniform(0.0, 8000.0),
         rng.uniform(-0.5, 0.9)};
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& q = queries[i++ & 1023];
    benchmark::DoNotOptimize(interpolate(grid, q[0], q[1], q[2]));
  }
}
BENCHMARK(BM_interpolate);

void BM_flatten(benchmark::State& state) {
  const LutGrid grid = benchmark_grid();
  for (auto _ : state) {
    benchmark::DoNotOptimize(flatten(grid));
  }
}
BENCHMARK(BM_flatten);

Tensor random_batch(Rng& rng, std::size_t n, std::size_t len) {
  Tensor t({n, len, 1});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1, 1);
  return t;
}

void BM_forward_batch32(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  NetworkModel model = build_dcnn(len, 1);
  Rng rng(8);
  Tensor batch = random_batch(rng, 32, len);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(model, batch));
  }
}
BENCHMARK(BM_forward_batch32)->Arg(3)->Arg(6);

void BM_train_step_batch32(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  NetworkModel model = build_dcnn(len, 1);
  AdamState adam(model);
  TrainConfig cfg;
  Rng rng(9);
  Tensor batch = random_batch(rng, 32, len);
  Tensor target({32, 1});
  for (std::size_t i = 0; i < 32; ++i) target[i] = rng.uniform(-1, 1);
  for (auto _ : state) {
    Gradients grads = backward(model, batch, target);
    adam_step(model, grads, adam, cfg);
  }
}
BENCHMARK(BM_train_step_batch32)->Arg(3)->Arg(6);

void BM_autoencoder_epoch(benchmark::State& state) {
  Rng rng(10);
  Tensor data({1024, 3});
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = rng.uniform(-1.5, 1.5);
  for (auto _ : state) {
    state.PauseTiming();
    Autoencoder ae(AutoencoderSpec{3, 8, 2}, 11);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.seed = 12;
    state.ResumeTiming();
    benchmark::DoNotOptimize(train_autoencoder(ae, data, cfg));
  }
}
BENCHMARK(BM_autoencoder_epoch);

}  // namespace

BENCHMARK_MAIN();
