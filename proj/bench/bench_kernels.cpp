// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <cmath>

#include "semo/distance_transform.hpp"
#include "semo/kernels.hpp"
#include "semo/rng.hpp"
#include "semo/superpixel.hpp"

using namespace semo;

namespace {

Tensor5<float> random_tensor(int n, int c, int t, int h, int w, std::uint64_t seed) {
  Tensor5<float> x(n, c, t, h, w);
  SplitMix rng(seed);
  for (auto& v : x.data) v = float(rng.uniform(-1, 1));
  return x;
}

// Second encoder layer of the desk model on a batch of 8.
struct ConvCase {
  kernels::ConvGeometry g{8, 16, {3, 3, 3}, {2, 2, 2}, {1, 1, 1}, {1, 1, 1}};
  Tensor5<float> x = random_tensor(8, 8, 2, 32, 32, 1);
  Tensor5<float> y{8, 16, 1, 16, 16};
  std::vector<float> w = std::vector<float>(g.weight_count(), 0.01f);
  std::vector<float> b = std::vector<float>(16, 0.f);
};

template <bool Serial>
void BM_ConvForward(benchmark::State& state) {
  ConvCase c;
  for (auto _ : state) {
    if constexpr (Serial)
      kernels::serial::conv3d_forward<float>(c.x, c.w, c.b, c.g, c.y);
    else
      kernels::conv3d_forward<float>(c.x, c.w, c.b, c.g, c.y);
    benchmark::DoNotOptimize(c.y.data.data());
  }
}

template <bool Serial>
void BM_ConvBackwardInput(benchmark::State& state) {
  ConvCase c;
  Tensor5<float> dx = c.x;
  for (auto _ : state) {
    if constexpr (Serial)
      kernels::serial::conv3d_backward_input<float>(c.y, c.w, c.g, dx);
    else
      kernels::conv3d_backward_input<float>(c.y, c.w, c.g, dx);
    benchmark::DoNotOptimize(dx.data.data());
  }
}

template <bool Serial>
void BM_ConvBackwardParams(benchmark::State& state) {
  ConvCase c;
  std::vector<float> dw(c.w.size()), db(c.b.size());
  for (auto _ : state) {
    if constexpr (Serial)
      kernels::serial::conv3d_backward_params<float>(c.x, c.y, c.g, dw, db);
    else
      kernels::conv3d_backward_params<float>(c.x, c.y, c.g, dw, db);
    benchmark::DoNotOptimize(dw.data());
  }
}

Plane<std::uint8_t> sparse_mask(int size) {
  Plane<std::uint8_t> m(size, size);
  SplitMix rng(3);
  for (auto& v : m.data) v = rng.uniform() < 0.01 ? 255 : 0;
  return m;
}

void BM_EdtSerial(benchmark::State& state) {
  const auto m = sparse_mask(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(squared_distance_transform_serial(m));
}

void BM_EdtOmp(benchmark::State& state) {
  const auto m = sparse_mask(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(squared_distance_transform(m));
}

struct SlicCase {
  Image<double> lab;
  RegionSpec region;
  std::vector<slic::Seed> seeds;
  double step = 0;
  SlicCase() {
    Frame f(3, 240, 360);
    SplitMix rng(5);
    for (auto& v : f.data) v = float(rng.uniform());
    lab = slic::to_lab(f);
    region.box = {0, 0, 239, 359};
    for (int i = 0; i < 240 * 360; ++i) region.pixels.push_back(i);
    seeds = slic::initial_seeds(lab, region, 10);
    step = std::sqrt(240.0 * 360.0 / 10.0);
  }
};

void BM_SlicAssignSerial(benchmark::State& state) {
  SlicCase c;
  for (auto _ : state) benchmark::DoNotOptimize(slic::assign_serial(c.lab, c.region, c.seeds, c.step, 10, true));
}

void BM_SlicAssignOmp(benchmark::State& state) {
  SlicCase c;
  for (auto _ : state) benchmark::DoNotOptimize(slic::assign(c.lab, c.region, c.seeds, c.step, 10, true));
}

}  // namespace

BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/serial");
BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/omp");
BENCHMARK(BM_ConvBackwardInput<true>)->Name("conv_backward_input/serial");
BENCHMARK(BM_ConvBackwardInput<false>)->Name("conv_backward_input/omp");
BENCHMARK(BM_ConvBackwardParams<true>)->Name("conv_backward_params/serial");
BENCHMARK(BM_ConvBackwardParams<false>)->Name("conv_backward_params/omp");
BENCHMARK(BM_EdtSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_EdtOmp)->Arg(256)->Arg(1024);
BENCHMARK(BM_SlicAssignSerial);
BENCHMARK(BM_SlicAssignOmp);

BENCHMARK_MAIN();
