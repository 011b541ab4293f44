// Parallel kernels against their serial references. Arguments are the cubic
// input edge length and, for reconstruction, the grid size K.

#include <benchmark/benchmark.h>

#include <random>

#include "ilpo/conv3d.hpp"
#include "ilpo/experiments.hpp"
#include "ilpo/filter.hpp"
#include "ilpo/orientation.hpp"

namespace {

using namespace ilpo;

struct ConvCase {
  VoxelGrid input;
  ExpandedFilter filter;
};

ConvCase conv_case(int n) {
  std::mt19937_64 rng(1);
  return {random_voxels(rng, 2, n), expand_filter(random_filter(2, 3, 2, 2, 1.0))};
}

CoefficientMaps maps_case(int n) {
  const ConvCase c = conv_case(n);
  return coefficient_convolution(c.input, c.filter);
}

void BM_ConvParallel(benchmark::State& state) {
  const ConvCase c = conv_case(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(coefficient_convolution(c.input, c.filter).values().data());
}

void BM_ConvSerial(benchmark::State& state) {
  const ConvCase c = conv_case(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::coefficient_convolution_serial(c.input, c.filter).values().data());
  }
}

void BM_ReconstructParallel(benchmark::State& state) {
  const CoefficientMaps m = maps_case(static_cast<int>(state.range(0)));
  const SO3Grid grid = make_so3_grid(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(m, grid).values().data());
}

void BM_ReconstructSerial(benchmark::State& state) {
  const CoefficientMaps m = maps_case(static_cast<int>(state.range(0)));
  const SO3Grid grid = make_so3_grid(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::reconstruct_serial(m, grid).values().data());
}

// Point-by-point synthesis without the factored tables.
void BM_ReconstructNaive(benchmark::State& state) {
  const CoefficientMaps m = maps_case(static_cast<int>(state.range(0)));
  const SO3Grid grid = make_so3_grid(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::reconstruct_naive(m, grid).values().data());
}

void BM_StreamedSoftmax(benchmark::State& state) {
  const CoefficientMaps m = maps_case(static_cast<int>(state.range(0)));
  const SO3Grid grid = make_so3_grid(static_cast<int>(state.range(1)));
  const PoolingOptions opts{Pooling::softmax, 1e-12, {}};
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_and_pool(m, grid, opts).output.values().data());
}

}  // namespace

BENCHMARK(BM_ConvParallel)->Arg(9)->Arg(17)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvSerial)->Arg(9)->Arg(17)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReconstructParallel)->Args({9, 4})->Args({9, 7})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReconstructSerial)->Args({9, 4})->Args({9, 7})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReconstructNaive)->Args({9, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StreamedSoftmax)->Args({9, 4})->Args({9, 7})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
