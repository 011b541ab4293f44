#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ilpo/conv3d.hpp"
#include "ilpo/so3.hpp"

namespace ilpo {

/// Orientation response h(x, R) on the sampled rotations. Flat index
/// ((out * voxels) + voxel) * K^3 + grid index, so each voxel's slice over
/// (q, r, s) is contiguous.
class OrientationMap {
 public:
  OrientationMap(int d_out, int X, int Y, int Z, const SO3Grid& grid);

  int d_out() const { return d_out_; }
  int X() const { return X_; }
  int Y() const { return Y_; }
  int Z() const { return Z_; }
  std::size_t voxels() const { return static_cast<std::size_t>(X_) * Y_ * Z_; }
  const SO3Grid& grid() const { return grid_; }
  std::size_t samples() const { return grid_.size(); }

  std::span<double> slice(int out, std::size_t voxel) {
    return std::span<double>(values_).subspan((static_cast<std::size_t>(out) * voxels() + voxel) * samples(),
                                              samples());
  }
  std::span<const double> slice(int out, std::size_t voxel) const {
    return std::span<const double>(values_).subspan(
        (static_cast<std::size_t>(out) * voxels() + voxel) * samples(), samples());
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  int d_out_;
  int X_;
  int Y_;
  int Z_;
  SO3Grid grid_;
  std::vector<double> values_;
};

/// Wigner synthesis of every voxel's coefficients on the grid, via the factored
/// d-pair / alpha / gamma contraction.
OrientationMap reconstruct(const CoefficientMaps& maps, const SO3Grid& grid);

/// Adjoint of reconstruct for band limit L.
CoefficientMaps reconstruct_adjoint(const OrientationMap& grad, int L);

enum class Pooling {
  hardmax,
  softmax,
  /// Fixed weighted sum over the grid, sum_qrs w_qrs h(q, r, s). Linear in h;
  /// used to check the linear stages in isolation.
  linear,
  /// (1 / 8 pi^2) times the quadrature integral.
  average
};

/// Pooled values plus what a backward pass needs. `argmax` is filled for
/// hardmax, `numerator`/`denominator` for softmax; all are indexed like the
/// output grid's values.
struct PoolingRecord {
  VoxelGrid output;
  std::vector<std::uint32_t> argmax;
  std::vector<double> numerator;
  std::vector<double> denominator;
};

struct PoolingOptions {
  Pooling pooling = Pooling::hardmax;
  /// Softmax returns 0 when the weighted relu sum falls below this.
  double eps = 1e-12;
  /// Grid-ordered weights for Pooling::linear (K^3 entries).
  std::vector<double> linear_weights;
};

PoolingRecord pool(const OrientationMap& m, const PoolingOptions& opts);

/// Grid maximum per voxel; ties go to the smallest (q, r, s).
VoxelGrid pool_hardmax(const OrientationMap& m);
/// sum w relu(h)^2 / sum w relu(h) with w = (2 pi / K)^2 w_r; 0 below eps.
VoxelGrid pool_softmax(const OrientationMap& m, double eps = 1e-12);
/// Quadrature mean over SO(3).
VoxelGrid pool_average(const OrientationMap& m);

/// reconstruct followed by pool, materializing at most `block_voxels` voxel
/// slices per output channel at a time. Bitwise equal to the two-step path.
PoolingRecord reconstruct_and_pool(const CoefficientMaps& maps, const SO3Grid& grid, const PoolingOptions& opts,
                                   std::size_t block_voxels = 4096);

/// Per-slice pooling kernels shared by every path above.
namespace slice_ops {
double hardmax(std::span<const double> h, std::uint32_t& arg);
double softmax(std::span<const double> h, const SO3Grid& grid, double eps, double& num, double& den);
double linear(std::span<const double> h, std::span<const double> weights);
double average(std::span<const double> h, const SO3Grid& grid);
}  // namespace slice_ops

namespace reference {

/// Single-threaded factored reconstruction.
OrientationMap reconstruct_serial(const CoefficientMaps& maps, const SO3Grid& grid);

/// Point-by-point synthesize_so3 at every grid rotation, no factoring.
OrientationMap reconstruct_naive(const CoefficientMaps& maps, const SO3Grid& grid);

}  // namespace reference

}  // namespace ilpo
