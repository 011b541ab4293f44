#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ilpo/filter.hpp"

namespace ilpo {

enum class Padding { same, valid };

/// Multi-channel scalar field on a regular lattice; flat index
/// ((c X + x) Y + y) Z + z.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(int channels, int X, int Y, int Z);

  int channels() const { return channels_; }
  int X() const { return X_; }
  int Y() const { return Y_; }
  int Z() const { return Z_; }
  std::size_t voxels() const { return static_cast<std::size_t>(X_) * Y_ * Z_; }

  std::size_t index(int c, int x, int y, int z) const {
    return ((static_cast<std::size_t>(c) * X_ + x) * Y_ + y) * Z_ + z;
  }
  double& operator()(int c, int x, int y, int z) { return values_[index(c, x, y, z)]; }
  double operator()(int c, int x, int y, int z) const { return values_[index(c, x, y, z)]; }
  std::span<double> channel(int c) {
    return std::span<double>(values_).subspan(static_cast<std::size_t>(c) * voxels(), voxels());
  }
  std::span<const double> channel(int c) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(c) * voxels(), voxels());
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const VoxelGrid& o) const {
    return channels_ == o.channels_ && X_ == o.X_ && Y_ == o.Y_ && Z_ == o.Z_;
  }
  std::string shape_string() const;

 private:
  int channels_ = 0;
  int X_ = 0;
  int Y_ = 0;
  int Z_ = 0;
  std::vector<double> values_;
};

/// Bitwise equality of shape and values.
bool identical(const VoxelGrid& a, const VoxelGrid& b);

/// Wigner coefficient fields h^l_{m1 m2}(x) per output channel, summed over
/// input channels. Flat index ((out * kernels + k) * voxels) + voxel.
class CoefficientMaps {
 public:
  CoefficientMaps(int d_out, int L, int X, int Y, int Z);

  int d_out() const { return d_out_; }
  int L() const { return L_; }
  int X() const { return X_; }
  int Y() const { return Y_; }
  int Z() const { return Z_; }
  std::size_t voxels() const { return static_cast<std::size_t>(X_) * Y_ * Z_; }
  std::size_t kernels() const { return kernel_count(L_); }

  std::span<double> field(int out, std::size_t k) {
    return std::span<double>(values_).subspan((static_cast<std::size_t>(out) * kernels() + k) * voxels(), voxels());
  }
  std::span<const double> field(int out, std::size_t k) const {
    return std::span<const double>(values_).subspan((static_cast<std::size_t>(out) * kernels() + k) * voxels(),
                                                    voxels());
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  int d_out_;
  int L_;
  int X_;
  int Y_;
  int Z_;
  std::vector<double> values_;
};

/// Spatial extent of the output for a given input extent.
int output_extent(int input_extent, int L, Padding padding);

/// One 3D correlation per expansion kernel:
///   h^l_{m1 m2}(p) = sum_in sum_{i'j'k'} f(p + (i', j', k') - L/2) g^l_{m1 m2}(i', j', k')
/// Zero padding for `same`; `valid` keeps only fully-covered positions (output
/// index p reads input from p + (i', j', k')). Each output element is reduced
/// serially over (in, i', j', k'), so results are bitwise independent of the
/// thread count.
CoefficientMaps coefficient_convolution(const VoxelGrid& input, const ExpandedFilter& filt,
                                        Padding padding = Padding::same);

/// Adjoint with respect to the input.
VoxelGrid conv_adjoint_input(const CoefficientMaps& grad, const ExpandedFilter& filt,
                             Padding padding, int X, int Y, int Z);

/// Adjoint with respect to the expanded filter.
ExpandedFilter conv_adjoint_filter(const VoxelGrid& input, const CoefficientMaps& grad, Padding padding);

/// Ordinary multi-channel correlation with plain kernels laid out [out][in][L^3].
VoxelGrid direct_convolution(const VoxelGrid& input, std::span<const double> kernels, int L, int d_out,
                             Padding padding = Padding::same);

namespace reference {

/// Straight nested-loop version of coefficient_convolution, single-threaded.
CoefficientMaps coefficient_convolution_serial(const VoxelGrid& input, const ExpandedFilter& filt,
                                               Padding padding = Padding::same);

}  // namespace reference

}  // namespace ilpo
