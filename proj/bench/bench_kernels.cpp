// Reference vs parallel kernels on the desk network's layer shapes.
//
//   ./build/bench_kernels --benchmark_filter=conv

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dfi/config.hpp"
#include "dfi/nn/kernels.hpp"
#include "dfi/nn/network.hpp"

using namespace dfi;
using namespace dfi::nn;

namespace {

struct ConvCase {
  Shape3 in;
  int out_channels;
  int kernel;
};

// First layer, a middle 3×3 layer and the 1×1 head of the desk network.
const ConvCase kCases[] = {
    {{3, 128, 128}, 8, 5},
    {{16, 32, 32}, 32, 3},
    {{64, 32, 32}, 14, 1},
};

std::vector<float> noise(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(-1.f, 1.f);
  std::vector<float> v(n);
  for (float& x : v) x = u(rng);
  return v;
}

struct ConvData {
  ConvCase c;
  std::vector<float> in, weight, bias, out, grad_out, grad_in, grad_weight, grad_bias;

  explicit ConvData(const ConvCase& cc) : c(cc) {
    const std::size_t wn = std::size_t(c.out_channels) * c.in.channels * c.kernel * c.kernel;
    const std::size_t on = std::size_t(c.out_channels) * c.in.height * c.in.width;
    in = noise(c.in.size(), 1);
    weight = noise(wn, 2);
    bias = noise(c.out_channels, 3);
    out.resize(on);
    grad_out = noise(on, 4);
    grad_in.resize(c.in.size());
    grad_weight.resize(wn);
    grad_bias.resize(c.out_channels);
  }

  double flops() const {
    return 2.0 * c.out_channels * c.in.channels * c.kernel * c.kernel * c.in.height * c.in.width;
  }
};

void BM_conv_forward_reference(benchmark::State& st) {
  ConvData d(kCases[st.range(0)]);
  for (auto _ : st) {
    reference::conv_forward(d.in.data(), d.c.in, d.weight.data(), d.bias.data(), d.c.out_channels,
                            d.c.kernel, d.out.data());
    benchmark::DoNotOptimize(d.out.data());
  }
  st.counters["GFLOP/s"] = benchmark::Counter(d.flops(), benchmark::Counter::kIsIterationInvariantRate,
                                              benchmark::Counter::OneK::kIs1000);
}

void BM_conv_forward_parallel(benchmark::State& st) {
  ConvData d(kCases[st.range(0)]);
  parallel::Workspace<float> ws;
  for (auto _ : st) {
    parallel::conv_forward(d.in.data(), d.c.in, d.weight.data(), d.bias.data(), d.c.out_channels,
                           d.c.kernel, d.out.data(), ws);
    benchmark::DoNotOptimize(d.out.data());
  }
  st.counters["GFLOP/s"] = benchmark::Counter(d.flops(), benchmark::Counter::kIsIterationInvariantRate,
                                              benchmark::Counter::OneK::kIs1000);
}

void BM_conv_backward_reference(benchmark::State& st) {
  ConvData d(kCases[st.range(0)]);
  for (auto _ : st) {
    reference::conv_backward(d.in.data(), d.c.in, d.weight.data(), d.c.out_channels, d.c.kernel,
                             d.grad_out.data(), d.grad_in.data(), d.grad_weight.data(), d.grad_bias.data());
    benchmark::DoNotOptimize(d.grad_in.data());
  }
  st.counters["GFLOP/s"] = benchmark::Counter(2 * d.flops(), benchmark::Counter::kIsIterationInvariantRate,
                                              benchmark::Counter::OneK::kIs1000);
}

void BM_conv_backward_parallel(benchmark::State& st) {
  ConvData d(kCases[st.range(0)]);
  parallel::Workspace<float> ws;
  for (auto _ : st) {
    parallel::conv_backward(d.in.data(), d.c.in, d.weight.data(), d.c.out_channels, d.c.kernel,
                            d.grad_out.data(), d.grad_in.data(), d.grad_weight.data(), d.grad_bias.data(), ws);
    benchmark::DoNotOptimize(d.grad_in.data());
  }
  st.counters["GFLOP/s"] = benchmark::Counter(2 * d.flops(), benchmark::Counter::kIsIterationInvariantRate,
                                              benchmark::Counter::OneK::kIs1000);
}

// One training step's worth of work on the full desk network.
void BM_network_step(benchmark::State& st) {
  const RunConfig cfg = RunConfig::for_preset(Preset::desk);
  Regressor net(cfg.architecture(), st.range(0) ? Backend::parallel : Backend::reference);
  net.init_he(1);
  const auto x = noise(net.input_shape().size(), 5);
  const auto up = noise(net.output_shape().size(), 6);
  ParamSet<float> grads = zero_params<float>(net.architecture());
  for (auto _ : st) {
    net.forward(x);
    net.backward(up, grads);
    benchmark::DoNotOptimize(grads.front().weight.data());
  }
  st.SetLabel(st.range(0) ? "parallel" : "reference");
}

}  // namespace

BENCHMARK(BM_conv_forward_reference)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_forward_parallel)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_backward_reference)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_backward_parallel)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_network_step)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
