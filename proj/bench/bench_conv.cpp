// Serial reference kernels against the im2col/OpenMP path, plus one full
// training step of each architecture for experiment sizing.

#include <benchmark/benchmark.h>

#include <random>

#include "randpad/builders.hpp"
#include "randpad/conv.hpp"
#include "randpad/layers.hpp"
#include "randpad/optim.hpp"

using namespace randpad;

namespace {

Tensor random_tensor(const Shape& s, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  Tensor t(s);
  for (float& v : t.data()) v = d(g);
  return t;
}

// args: batch, in channels, out channels, extent
struct ConvCase {
  Tensor x;
  Tensor w;
  std::vector<float> b;
  Tensor g;
  explicit ConvCase(const benchmark::State& st)
      : x(random_tensor({std::size_t(st.range(0)), std::size_t(st.range(1)),
                         std::size_t(st.range(3)) + 2, std::size_t(st.range(3)) + 2},
                        1)),
        w(random_tensor({std::size_t(st.range(2)), std::size_t(st.range(1)), 3, 3}, 2)),
        b(std::size_t(st.range(2)), 0.1f),
        g(random_tensor({std::size_t(st.range(0)), std::size_t(st.range(2)),
                         std::size_t(st.range(3)), std::size_t(st.range(3))},
                        3)) {}
  double macs() const { return double(g.numel()) * double(w.shape().c * 9); }
};

void BM_ConvForwardFast(benchmark::State& st) {
  ConvCase c(st);
  for (auto _ : st) benchmark::DoNotOptimize(conv2d(c.x, c.w, c.b));
  st.counters["MAC/s"] = benchmark::Counter(c.macs(), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_ConvForwardReference(benchmark::State& st) {
  ConvCase c(st);
  for (auto _ : st) benchmark::DoNotOptimize(reference::conv2d(c.x, c.w, c.b));
  st.counters["MAC/s"] = benchmark::Counter(c.macs(), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_ConvBackwardFast(benchmark::State& st) {
  ConvCase c(st);
  for (auto _ : st) benchmark::DoNotOptimize(conv2d_backward(c.x, c.w, c.g));
  st.counters["MAC/s"] =
      benchmark::Counter(2 * c.macs(), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_ConvBackwardReference(benchmark::State& st) {
  ConvCase c(st);
  for (auto _ : st) benchmark::DoNotOptimize(reference::conv2d_backward(c.x, c.w, c.g));
  st.counters["MAC/s"] =
      benchmark::Counter(2 * c.macs(), benchmark::Counter::kIsIterationInvariantRate);
}

void conv_args(benchmark::internal::Benchmark* b) {
  b->Args({64, 3, 8, 32})->Args({64, 8, 8, 32})->Args({64, 16, 16, 16})->Args({64, 32, 32, 8});
  b->Unit(benchmark::kMillisecond);
}

BENCHMARK(BM_ConvForwardFast)->Apply(conv_args);
BENCHMARK(BM_ConvForwardReference)->Apply(conv_args);
BENCHMARK(BM_ConvBackwardFast)->Apply(conv_args);
BENCHMARK(BM_ConvBackwardReference)->Apply(conv_args);

// args: architecture, width
void BM_TrainStep(benchmark::State& st) {
  ModelConfig cfg;
  cfg.arch = static_cast<Architecture>(st.range(0));
  cfg.width = static_cast<std::size_t>(st.range(1));
  cfg.rp_layers = 1;
  if (cfg.arch != Architecture::cnn_lite) {
    cfg.in_channels = 3;
    cfg.in_h = cfg.in_w = 32;
  }
  Model m = build_model(cfg);
  const std::size_t batch = 64;
  const Tensor x = random_tensor({batch, cfg.in_channels, cfg.in_h, cfg.in_w}, 4);
  std::vector<std::uint32_t> labels(batch);
  std::vector<std::uint64_t> ids(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    labels[i] = static_cast<std::uint32_t>(i % 10);
    ids[i] = i;
  }
  OptimizerState opt;
  auto params = m.parameters();
  for (auto _ : st) {
    const LossResult l = softmax_cross_entropy(m.forward(x, {Mode::train, 1, 0, ids}), labels);
    m.backward(l.grad);
    sgd_step(params, opt);
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * batch));
}

BENCHMARK(BM_TrainStep)
    ->Args({0, 8})
    ->Args({1, 8})
    ->Args({2, 8})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
