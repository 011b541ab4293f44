#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ilpo/so3.hpp"
#include "ilpo/special_functions.hpp"

namespace ilpo {

/// Number of (l, m1, m2) expansion kernels for band limit L.
inline std::size_t kernel_count(int L) { return WignerCoefficients::count(L); }
inline std::size_t kernel_index(int l, int m1, int m2) {
  return WignerCoefficients::flat_index(l, m1, m2);
}

/// Centered L^3 voxel cube grouped into radius shells. Voxel v = (i L + j) L + k
/// sits at offset (i, j, k) - L/2 along (x, y, z).
class FilterGeometry {
 public:
  explicit FilterGeometry(int L);

  int L() const { return L_; }
  int volume() const { return L_ * L_ * L_; }
  int center_voxel() const { return (L_ * L_ * L_) / 2; }
  int shell_count() const { return static_cast<int>(shells_.size()); }
  /// Distinct voxel radii, ascending; shells()[0] == 0.
  const std::vector<double>& shells() const { return shells_; }

  int shell_of(int voxel) const { return shell_[static_cast<std::size_t>(voxel)]; }
  double radius_of(int voxel) const { return shells_[static_cast<std::size_t>(shell_of(voxel))]; }
  const SphericalAngle& angle_of(int voxel) const { return angle_[static_cast<std::size_t>(voxel)]; }
  std::array<int, 3> offset(int voxel) const;

  /// Angular factor of kernel (l, m) at a voxel: Y_l^m(Omega_v), with the
  /// center voxel carrying only Y_0^0.
  double harmonic(int voxel, int l, int m) const {
    return ylm_[static_cast<std::size_t>(voxel) * L_ * L_ + static_cast<std::size_t>(l * l + l + m)];
  }

 private:
  int L_;
  std::vector<double> shells_;
  std::vector<int> shell_;
  std::vector<SphericalAngle> angle_;
  std::vector<double> ylm_;
};

/// Learnable radial-shell coefficients g_l^m(r), tensor (out, in, l, m, shell)
/// with m running -l..l. Entries on the r = 0 shell with l > 0 are held at zero.
class FilterCoefficients {
 public:
  FilterCoefficients(int L, int d_in, int d_out);

  const FilterGeometry& geometry() const { return geometry_; }
  int L() const { return geometry_.L(); }
  int d_in() const { return d_in_; }
  int d_out() const { return d_out_; }

  std::size_t index(int out, int in, int l, int m, int shell) const {
    const int L = geometry_.L();
    return ((static_cast<std::size_t>(out) * d_in_ + in) * L * L + (l * l + l + m)) *
               geometry_.shell_count() +
           shell;
  }
  double& operator()(int out, int in, int l, int m, int shell) { return values_[index(out, in, l, m, shell)]; }
  double operator()(int out, int in, int l, int m, int shell) const {
    return values_[index(out, in, l, m, shell)];
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// True for the structurally-zero (r = 0, l > 0) entries.
  bool masked(int l, int shell) const { return shell == 0 && l > 0; }
  void apply_mask();

 private:
  FilterGeometry geometry_;
  int d_in_;
  int d_out_;
  std::vector<double> values_;
};

/// D_in * D_out * ((shells with r > 0) * L^2 + 1).
std::size_t free_parameter_count(int L, int d_in, int d_out);

/// Voxel kernels g^l_{m1 m2}(x) = g_l^{m1}(r) Y_l^{m2}(Omega), one L^3 block per
/// (out, in, l, m1, m2).
class ExpandedFilter {
 public:
  ExpandedFilter(int L, int d_in, int d_out);

  int L() const { return L_; }
  int d_in() const { return d_in_; }
  int d_out() const { return d_out_; }
  int volume() const { return L_ * L_ * L_; }
  std::size_t kernels() const { return kernel_count(L_); }

  std::size_t offset(int out, int in, std::size_t k) const {
    return ((static_cast<std::size_t>(out) * d_in_ + in) * kernels() + k) * volume();
  }
  std::span<double> kernel(int out, int in, std::size_t k) {
    return std::span<double>(values_).subspan(offset(out, in, k), static_cast<std::size_t>(volume()));
  }
  std::span<const double> kernel(int out, int in, std::size_t k) const {
    return std::span<const double>(values_).subspan(offset(out, in, k), static_cast<std::size_t>(volume()));
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  int L_;
  int d_in_;
  int d_out_;
  std::vector<double> values_;
};

ExpandedFilter expand_filter(const FilterCoefficients& c);

/// Adjoint of expand_filter: maps a gradient over voxel kernels back to the
/// coefficient tensor. Masked entries come out zero.
FilterCoefficients expand_filter_adjoint(const ExpandedFilter& grad);

/// Zero-mean normal coefficients with standard deviation `scale`, deterministic in `seed`.
FilterCoefficients random_filter(std::uint64_t seed, int L, int d_in, int d_out, double scale);

/// Copy keeping only the l = 0 coefficients.
FilterCoefficients radial_component(const FilterCoefficients& c);

/// Coefficients of the rotated filter x -> g(R x):
/// g'_l^{m2}(r) = sum_{m1} g_l^{m1}(r) D^l_{m1 m2}(R).
FilterCoefficients rotate_filter(const FilterCoefficients& c, const EulerZYZ& e);

/// Plain spatial kernels g(x) = sum_{l,m} g_l^m(r) Y_l^m(Omega), layout
/// [out][in][L^3]. This is the filter in its reference orientation.
std::vector<double> spatial_kernels(const FilterCoefficients& c);

/// Per-degree contributions sum_m g_l^m(r_shell) Y_l^m(angle) of one channel
/// pair on one shell; summing the entries gives the filter value there.
std::vector<double> angular_profile(const FilterCoefficients& c, int out, int in, int shell,
                                    const SphericalAngle& angle);

}  // namespace ilpo
