#include "ilpo/orientation.hpp"

#include <algorithm>

#include "ilpo/error.hpp"

namespace ilpo {
namespace {

void gather(const CoefficientMaps& maps, int out, std::size_t voxel, std::span<double> coeffs) {
  const std::size_t nk = maps.kernels();
  const std::size_t nv = maps.voxels();
  const double* base = maps.values().data() + static_cast<std::size_t>(out) * nk * nv + voxel;
  for (std::size_t k = 0; k < nk; ++k) coeffs[k] = base[k * nv];
}

PoolingRecord make_record(int d_out, int X, int Y, int Z, Pooling pooling) {
  PoolingRecord rec{VoxelGrid(d_out, X, Y, Z), {}, {}, {}};
  const std::size_t n = rec.output.values().size();
  if (pooling == Pooling::hardmax) rec.argmax.assign(n, 0);
  if (pooling == Pooling::softmax) {
    rec.numerator.assign(n, 0.0);
    rec.denominator.assign(n, 0.0);
  }
  return rec;
}

void check_options(const PoolingOptions& opts, std::size_t samples) {
  if (opts.pooling == Pooling::softmax && !(opts.eps > 0.0)) throw DomainError("softmax eps must be positive");
  if (opts.pooling == Pooling::linear && opts.linear_weights.size() != samples) {
    throw ShapeError("linear pooling needs " + std::to_string(samples) + " weights, got " +
                     std::to_string(opts.linear_weights.size()));
  }
}

void pool_slice(std::span<const double> h, const SO3Grid& grid, const PoolingOptions& opts, PoolingRecord& rec,
                std::size_t at) {
  double& out = rec.output.values()[at];
  switch (opts.pooling) {
    case Pooling::hardmax:
      out = slice_ops::hardmax(h, rec.argmax[at]);
      break;
    case Pooling::softmax:
      out = slice_ops::softmax(h, grid, opts.eps, rec.numerator[at], rec.denominator[at]);
      break;
    case Pooling::linear:
      out = slice_ops::linear(h, opts.linear_weights);
      break;
    case Pooling::average:
      out = slice_ops::average(h, grid);
      break;
  }
}

}  // namespace

OrientationMap::OrientationMap(int d_out, int X, int Y, int Z, const SO3Grid& grid)
    : d_out_(d_out), X_(X), Y_(Y), Z_(Z), grid_(grid) {
  if (d_out < 1 || X < 1 || Y < 1 || Z < 1) throw ShapeError("orientation map dimensions must be positive");
  values_.assign(static_cast<std::size_t>(d_out) * voxels() * samples(), 0.0);
}

namespace slice_ops {

double hardmax(std::span<const double> h, std::uint32_t& arg) {
  std::uint32_t best = 0;
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[best]) best = static_cast<std::uint32_t>(i);
  }
  arg = best;
  return h[best];
}

double softmax(std::span<const double> h, const SO3Grid& grid, double eps, double& num, double& den) {
  const int K = grid.K();
  num = 0.0;
  den = 0.0;
  std::size_t i = 0;
  for (int q = 0; q < K; ++q) {
    for (int r = 0; r < K; ++r) {
      const double w = grid.weight(r);
      for (int s = 0; s < K; ++s, ++i) {
        if (h[i] > 0.0) {
          num += w * h[i] * h[i];
          den += w * h[i];
        }
      }
    }
  }
  return den < eps ? 0.0 : num / den;
}

double linear(std::span<const double> h, std::span<const double> weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) acc += weights[i] * h[i];
  return acc;
}

double average(std::span<const double> h, const SO3Grid& grid) {
  return integrate_so3(grid, h) / (8.0 * kPi * kPi);
}

}  // namespace slice_ops

OrientationMap reconstruct(const CoefficientMaps& maps, const SO3Grid& grid) {
  OrientationMap m(maps.d_out(), maps.X(), maps.Y(), maps.Z(), grid);
  const auto table = shared_wigner_table(grid.K(), maps.L());
  const std::size_t nv = maps.voxels();
  const long long total = static_cast<long long>(maps.d_out()) * static_cast<long long>(nv);

#pragma omp parallel
  {
    std::vector<double> coeffs(maps.kernels());
#pragma omp for schedule(static)
    for (long long t = 0; t < total; ++t) {
      const int o = static_cast<int>(t / static_cast<long long>(nv));
      const std::size_t v = static_cast<std::size_t>(t % static_cast<long long>(nv));
      gather(maps, o, v, coeffs);
      table->synthesize(coeffs, m.slice(o, v));
    }
  }
  return m;
}

CoefficientMaps reconstruct_adjoint(const OrientationMap& grad, int L) {
  CoefficientMaps maps(grad.d_out(), L, grad.X(), grad.Y(), grad.Z());
  const auto table = shared_wigner_table(grad.grid().K(), L);
  const std::size_t nv = maps.voxels();
  const std::size_t nk = maps.kernels();
  const long long total = static_cast<long long>(grad.d_out()) * static_cast<long long>(nv);

#pragma omp parallel
  {
    std::vector<double> coeffs(nk);
#pragma omp for schedule(static)
    for (long long t = 0; t < total; ++t) {
      const int o = static_cast<int>(t / static_cast<long long>(nv));
      const std::size_t v = static_cast<std::size_t>(t % static_cast<long long>(nv));
      table->analyze(grad.slice(o, v), coeffs);
      double* base = maps.values().data() + static_cast<std::size_t>(o) * nk * nv + v;
      for (std::size_t k = 0; k < nk; ++k) base[k * nv] = coeffs[k];
    }
  }
  return maps;
}

PoolingRecord pool(const OrientationMap& m, const PoolingOptions& opts) {
  check_options(opts, m.samples());
  PoolingRecord rec = make_record(m.d_out(), m.X(), m.Y(), m.Z(), opts.pooling);
  const std::size_t nv = m.voxels();
  const long long total = static_cast<long long>(m.d_out()) * static_cast<long long>(nv);

#pragma omp parallel for schedule(static)
  for (long long t = 0; t < total; ++t) {
    const int o = static_cast<int>(t / static_cast<long long>(nv));
    const std::size_t v = static_cast<std::size_t>(t % static_cast<long long>(nv));
    pool_slice(m.slice(o, v), m.grid(), opts, rec, static_cast<std::size_t>(t));
  }
  return rec;
}

VoxelGrid pool_hardmax(const OrientationMap& m) { return pool(m, {Pooling::hardmax, 1e-12, {}}).output; }

VoxelGrid pool_softmax(const OrientationMap& m, double eps) {
  return pool(m, {Pooling::softmax, eps, {}}).output;
}

VoxelGrid pool_average(const OrientationMap& m) { return pool(m, {Pooling::average, 1e-12, {}}).output; }

PoolingRecord reconstruct_and_pool(const CoefficientMaps& maps, const SO3Grid& grid, const PoolingOptions& opts,
                                   std::size_t block_voxels) {
  const std::size_t samples = grid.size();
  check_options(opts, samples);
  if (block_voxels == 0) throw DomainError("block size must be positive");
  PoolingRecord rec = make_record(maps.d_out(), maps.X(), maps.Y(), maps.Z(), opts.pooling);
  const auto table = shared_wigner_table(grid.K(), maps.L());
  const std::size_t nv = maps.voxels();
  std::vector<double> block(block_voxels * samples);

  for (int o = 0; o < maps.d_out(); ++o) {
    for (std::size_t start = 0; start < nv; start += block_voxels) {
      const long long count = static_cast<long long>(std::min(block_voxels, nv - start));
#pragma omp parallel
      {
        std::vector<double> coeffs(maps.kernels());
#pragma omp for schedule(static)
        for (long long b = 0; b < count; ++b) {
          const std::size_t v = start + static_cast<std::size_t>(b);
          std::span<double> h(block.data() + static_cast<std::size_t>(b) * samples, samples);
          gather(maps, o, v, coeffs);
          table->synthesize(coeffs, h);
          pool_slice(h, grid, opts, rec, static_cast<std::size_t>(o) * nv + v);
        }
      }
    }
  }
  return rec;
}

}  // namespace ilpo
