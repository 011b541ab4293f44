#include <doctest.h>

#include <cmath>
#include <random>

#include "ilpo/filter.hpp"
#include "ilpo/so3.hpp"
#include "support.hpp"

using namespace ilpo;
using testing_support::max_abs_diff;

TEST_CASE("L=3 geometry has four shells centered on voxel 13") {
  const FilterGeometry g(3);
  REQUIRE(g.shell_count() == 4);
  CHECK(g.shells()[0] == 0.0);
  CHECK(std::abs(g.shells()[1] - 1.0) < 1e-15);
  CHECK(std::abs(g.shells()[2] - std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(g.shells()[3] - std::sqrt(3.0)) < 1e-15);
  CHECK(g.center_voxel() == 13);
  CHECK(g.shell_of(13) == 0);
  CHECK(g.offset(0) == std::array<int, 3>{-1, -1, -1});
  // Voxel (2, 1, 1) sits on +x.
  const int v = (2 * 3 + 1) * 3 + 1;
  CHECK(g.shell_of(v) == 1);
  CHECK(std::abs(g.angle_of(v).polar - kPi / 2) < 1e-15);
  CHECK(std::abs(g.angle_of(v).azimuthal) < 1e-15);
}

TEST_CASE("free parameter count") {
  CHECK(free_parameter_count(3, 1, 1) == 28);
  CHECK(free_parameter_count(3, 2, 3) == 6 * 28);
  CHECK(free_parameter_count(1, 1, 1) == 1);
}

TEST_CASE("random_filter is seeded, scaled and masked") {
  const FilterCoefficients a = random_filter(1, 3, 1, 1, 1.0);
  const FilterCoefficients b = random_filter(1, 3, 1, 1, 1.0);
  CHECK(a.values() == b.values());
  std::size_t nonzero = 0;
  for (double v : a.values()) nonzero += v != 0.0;
  CHECK(nonzero == 28);
  for (int l = 1; l < 3; ++l)
    for (int m = -l; m <= l; ++m) CHECK(a(0, 0, l, m, 0) == 0.0);
  const FilterCoefficients zero = random_filter(2, 3, 2, 2, 0.0);
  for (double v : zero.values()) CHECK(v == 0.0);
}

TEST_CASE("expand_filter is linear") {
  const FilterCoefficients c1 = random_filter(3, 3, 2, 2, 1.0);
  const FilterCoefficients c2 = random_filter(4, 3, 2, 2, 1.0);
  FilterCoefficients mix(3, 2, 2);
  for (std::size_t i = 0; i < mix.values().size(); ++i) mix.values()[i] = 2.0 * c1.values()[i] - 0.5 * c2.values()[i];
  const ExpandedFilter e1 = expand_filter(c1), e2 = expand_filter(c2), em = expand_filter(mix);
  double worst = 0.0;
  for (std::size_t i = 0; i < em.values().size(); ++i) {
    worst = std::max(worst, std::abs(em.values()[i] - (2.0 * e1.values()[i] - 0.5 * e2.values()[i])));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("the l=0 kernel is constant on each shell") {
  const FilterCoefficients c = random_filter(5, 5, 1, 1, 1.0);
  const ExpandedFilter e = expand_filter(c);
  const FilterGeometry& g = c.geometry();
  const auto k = e.kernel(0, 0, kernel_index(0, 0, 0));
  for (int v = 0; v < g.volume(); ++v) {
    const double expected = c(0, 0, 0, 0, g.shell_of(v)) / (2.0 * std::sqrt(kPi));
    CHECK(std::abs(k[v] - expected) < 1e-15);
  }
}

TEST_CASE("expansion kernels are radial profile times harmonic") {
  const FilterCoefficients c = random_filter(6, 3, 1, 2, 1.0);
  const ExpandedFilter e = expand_filter(c);
  const FilterGeometry& g = c.geometry();
  for (int l = 0; l < 3; ++l)
    for (int m1 = -l; m1 <= l; ++m1)
      for (int m2 = -l; m2 <= l; ++m2)
        for (int v = 0; v < g.volume(); ++v) {
          const int sh = g.shell_of(v);
          const double y = sh == 0 ? (l == 0 ? 1.0 / (2.0 * std::sqrt(kPi)) : 0.0)
                                   : real_spherical_harmonic(l, m2, g.angle_of(v));
          CHECK(std::abs(e.kernel(1, 0, kernel_index(l, m1, m2))[v] - c(1, 0, l, m1, sh) * y) < 1e-15);
        }
}

TEST_CASE("expand_filter_adjoint is the adjoint of expand_filter") {
  std::mt19937_64 rng(7);
  const FilterCoefficients c = random_filter(7, 3, 2, 2, 1.0);
  ExpandedFilter u(3, 2, 2);
  testing_support::fill_normal(u.values(), rng);
  const double lhs = testing_support::dot(expand_filter(c).values(), u.values());
  const double rhs = testing_support::dot(c.values(), expand_filter_adjoint(u).values());
  CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("radial_component keeps only l = 0") {
  const FilterCoefficients c = random_filter(8, 3, 1, 1, 1.0);
  const FilterCoefficients r = radial_component(c);
  CHECK(radial_component(r).values() == r.values());
  const FilterCoefficients zero = radial_component(FilterCoefficients(3, 1, 1));
  for (double v : zero.values()) CHECK(v == 0.0);
  const std::vector<double> k = spatial_kernels(r);
  const FilterGeometry& g = c.geometry();
  for (int v = 0; v < g.volume(); ++v) {
    for (int w = 0; w < g.volume(); ++w) {
      if (g.shell_of(v) == g.shell_of(w)) CHECK(k[v] == k[w]);
    }
  }
}

TEST_CASE("rotate_filter evaluates the filter at rotated directions") {
  const FilterCoefficients c = random_filter(9, 3, 1, 1, 1.0);
  const EulerZYZ e{0.4, 1.1, 2.3};
  const std::vector<double> rotated = spatial_kernels(rotate_filter(c, e));
  const FilterGeometry& g = c.geometry();
  const Matrix3 R = euler_to_matrix(e);
  for (int v = 0; v < g.volume(); ++v) {
    if (g.shell_of(v) == 0) continue;
    const auto o = g.offset(v);
    double y[3];
    for (int r = 0; r < 3; ++r) y[r] = R[3 * r] * o[0] + R[3 * r + 1] * o[1] + R[3 * r + 2] * o[2];
    const SphericalAngle a = SphericalAngle::from_cartesian(y[0], y[1], y[2]);
    double expected = 0.0;
    for (int l = 0; l < 3; ++l)
      for (int m = -l; m <= l; ++m) expected += c(0, 0, l, m, g.shell_of(v)) * real_spherical_harmonic(l, m, a);
    CHECK(std::abs(rotated[v] - expected) < 1e-12);
  }
}

TEST_CASE("angular_profile parts sum to the spatial kernel") {
  const FilterCoefficients c = random_filter(10, 3, 1, 1, 1.0);
  const std::vector<double> k = spatial_kernels(c);
  const FilterGeometry& g = c.geometry();
  for (int v = 0; v < g.volume(); ++v) {
    if (g.shell_of(v) == 0) continue;
    double s = 0.0;
    for (double part : angular_profile(c, 0, 0, g.shell_of(v), g.angle_of(v))) s += part;
    CHECK(std::abs(s - k[v]) < 1e-13);
  }
}
