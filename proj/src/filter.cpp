#include "ilpo/filter.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ilpo/error.hpp"

namespace ilpo {

FilterGeometry::FilterGeometry(int L) : L_(L) {
  if (L < 1 || L % 2 == 0) {
    throw DomainError("filter size must be odd and positive, got " + std::to_string(L));
  }
  const int n = L * L * L;
  const int h = L / 2;
  std::vector<double> radii(static_cast<std::size_t>(n));
  angle_.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    const int x = v / (L * L) - h;
    const int y = (v / L) % L - h;
    const int z = v % L - h;
    radii[v] = std::sqrt(static_cast<double>(x * x + y * y + z * z));
    angle_[v] = SphericalAngle::from_cartesian(x, y, z);
  }
  std::vector<double> sorted = radii;
  std::sort(sorted.begin(), sorted.end());
  for (double r : sorted) {
    if (shells_.empty() || r - shells_.back() > 1e-9) shells_.push_back(r);
  }
  shell_.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    const auto it = std::lower_bound(shells_.begin(), shells_.end(), radii[v] - 1e-9);
    shell_[v] = static_cast<int>(it - shells_.begin());
  }
  ylm_.assign(static_cast<std::size_t>(n) * L * L, 0.0);
  for (int v = 0; v < n; ++v) {
    for (int l = 0; l < L; ++l) {
      for (int m = -l; m <= l; ++m) {
        double y = 0.0;
        if (shell_[v] != 0) {
          y = real_spherical_harmonic(l, m, angle_[v]);
        } else if (l == 0) {
          y = real_spherical_harmonic(0, 0, angle_[v]);
        }
        ylm_[static_cast<std::size_t>(v) * L * L + (l * l + l + m)] = y;
      }
    }
  }
}

std::array<int, 3> FilterGeometry::offset(int voxel) const {
  const int h = L_ / 2;
  return {voxel / (L_ * L_) - h, (voxel / L_) % L_ - h, voxel % L_ - h};
}

FilterCoefficients::FilterCoefficients(int L, int d_in, int d_out)
    : geometry_(L), d_in_(d_in), d_out_(d_out) {
  if (d_in < 1 || d_out < 1) throw ShapeError("filter channel counts must be positive");
  values_.assign(static_cast<std::size_t>(d_out) * d_in * L * L * geometry_.shell_count(), 0.0);
}

void FilterCoefficients::apply_mask() {
  const int L = geometry_.L();
  for (int o = 0; o < d_out_; ++o)
    for (int i = 0; i < d_in_; ++i)
      for (int l = 1; l < L; ++l)
        for (int m = -l; m <= l; ++m) values_[index(o, i, l, m, 0)] = 0.0;
}

std::size_t free_parameter_count(int L, int d_in, int d_out) {
  const FilterGeometry g(L);
  const std::size_t per_pair = static_cast<std::size_t>(g.shell_count() - 1) * L * L + 1;
  return static_cast<std::size_t>(d_in) * d_out * per_pair;
}

ExpandedFilter::ExpandedFilter(int L, int d_in, int d_out) : L_(L), d_in_(d_in), d_out_(d_out) {
  values_.assign(static_cast<std::size_t>(d_out) * d_in * kernel_count(L) * L * L * L, 0.0);
}

ExpandedFilter expand_filter(const FilterCoefficients& c) {
  const FilterGeometry& geo = c.geometry();
  const int L = c.L();
  ExpandedFilter out(L, c.d_in(), c.d_out());
  for (int o = 0; o < c.d_out(); ++o)
    for (int i = 0; i < c.d_in(); ++i)
      for (int l = 0; l < L; ++l)
        for (int m1 = -l; m1 <= l; ++m1)
          for (int m2 = -l; m2 <= l; ++m2) {
            std::span<double> k = out.kernel(o, i, kernel_index(l, m1, m2));
            for (int v = 0; v < geo.volume(); ++v) {
              k[v] = c(o, i, l, m1, geo.shell_of(v)) * geo.harmonic(v, l, m2);
            }
          }
  return out;
}

FilterCoefficients expand_filter_adjoint(const ExpandedFilter& grad) {
  const int L = grad.L();
  FilterCoefficients out(L, grad.d_in(), grad.d_out());
  const FilterGeometry& geo = out.geometry();
  for (int o = 0; o < grad.d_out(); ++o)
    for (int i = 0; i < grad.d_in(); ++i)
      for (int l = 0; l < L; ++l)
        for (int m1 = -l; m1 <= l; ++m1)
          for (int m2 = -l; m2 <= l; ++m2) {
            std::span<const double> k = grad.kernel(o, i, kernel_index(l, m1, m2));
            for (int v = 0; v < geo.volume(); ++v) {
              out(o, i, l, m1, geo.shell_of(v)) += k[v] * geo.harmonic(v, l, m2);
            }
          }
  out.apply_mask();
  return out;
}

FilterCoefficients random_filter(std::uint64_t seed, int L, int d_in, int d_out, double scale) {
  FilterCoefficients c(L, d_in, d_out);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : c.values()) v = scale * normal(rng);
  c.apply_mask();
  return c;
}

FilterCoefficients radial_component(const FilterCoefficients& c) {
  FilterCoefficients out = c;
  const int L = c.L();
  for (int o = 0; o < c.d_out(); ++o)
    for (int i = 0; i < c.d_in(); ++i)
      for (int l = 1; l < L; ++l)
        for (int m = -l; m <= l; ++m)
          for (int s = 0; s < c.geometry().shell_count(); ++s) out(o, i, l, m, s) = 0.0;
  return out;
}

FilterCoefficients rotate_filter(const FilterCoefficients& c, const EulerZYZ& e) {
  FilterCoefficients out(c.L(), c.d_in(), c.d_out());
  const int shells = c.geometry().shell_count();
  for (int l = 0; l < c.L(); ++l) {
    const int n = 2 * l + 1;
    const std::vector<double> D = wigner_D_matrix(l, e);
    for (int o = 0; o < c.d_out(); ++o)
      for (int i = 0; i < c.d_in(); ++i)
        for (int s = 0; s < shells; ++s)
          for (int m2 = -l; m2 <= l; ++m2) {
            double acc = 0.0;
            for (int m1 = -l; m1 <= l; ++m1) acc += c(o, i, l, m1, s) * D[(m1 + l) * n + (m2 + l)];
            out(o, i, l, m2, s) = acc;
          }
  }
  out.apply_mask();
  return out;
}

std::vector<double> spatial_kernels(const FilterCoefficients& c) {
  const FilterGeometry& geo = c.geometry();
  const int vol = geo.volume();
  std::vector<double> out(static_cast<std::size_t>(c.d_out()) * c.d_in() * vol, 0.0);
  for (int o = 0; o < c.d_out(); ++o)
    for (int i = 0; i < c.d_in(); ++i)
      for (int v = 0; v < vol; ++v) {
        double s = 0.0;
        for (int l = 0; l < c.L(); ++l)
          for (int m = -l; m <= l; ++m) s += c(o, i, l, m, geo.shell_of(v)) * geo.harmonic(v, l, m);
        out[(static_cast<std::size_t>(o) * c.d_in() + i) * vol + v] = s;
      }
  return out;
}

std::vector<double> angular_profile(const FilterCoefficients& c, int out, int in, int shell,
                                    const SphericalAngle& angle) {
  std::vector<double> per_degree(static_cast<std::size_t>(c.L()), 0.0);
  for (int l = 0; l < c.L(); ++l) {
    if (c.masked(l, shell)) continue;
    double s = 0.0;
    for (int m = -l; m <= l; ++m) s += c(out, in, l, m, shell) * real_spherical_harmonic(l, m, angle);
    per_degree[l] = s;
  }
  return per_degree;
}

}  // namespace ilpo
