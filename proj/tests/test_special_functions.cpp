#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "ilpo/error.hpp"
#include "ilpo/so3.hpp"
#include "ilpo/special_functions.hpp"
#include "support.hpp"

using namespace ilpo;
using testing_support::uniform;

namespace {

// Real-basis Wigner element by projection on the sphere:
// D_{m1 m2}(R) = integral of Y^{m1}(R x) Y^{m2}(x) over S^2.
// Gauss-Legendre in cos(theta) x uniform azimuth is exact for degree <= 8 products.
double sphere_projection_D(int l, int m1, int m2, const EulerZYZ& e) {
  const QuadratureRule gl = gauss_legendre(12);
  const int n_phi = 24;
  const Matrix3 R = euler_to_matrix(e);
  double sum = 0.0;
  for (int i = 0; i < gl.order(); ++i) {
    const double ct = gl.nodes[i];
    const double st = std::sqrt(1.0 - ct * ct);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * kPi * j / n_phi;
      const double x[3] = {st * std::cos(phi), st * std::sin(phi), ct};
      double y[3];
      for (int r = 0; r < 3; ++r) y[r] = R[3 * r] * x[0] + R[3 * r + 1] * x[1] + R[3 * r + 2] * x[2];
      const double a = real_spherical_harmonic(l, m1, SphericalAngle::from_cartesian(y[0], y[1], y[2]));
      const double b = real_spherical_harmonic(l, m2, SphericalAngle::from_cartesian(x[0], x[1], x[2]));
      sum += gl.weights[i] * (2.0 * kPi / n_phi) * a * b;
    }
  }
  return sum;
}

double two_term(int l, int m1, int m2, const EulerZYZ& e) {
  const WignerDPair p = wigner_d_pair(l, m1, m2, e.beta);
  return cos_sin(m1, m1 * e.alpha) * p.d1 * cos_sin(m2, m2 * e.gamma) +
         cos_sin(-m1, m1 * e.alpha) * p.d2 * cos_sin(-m2, m2 * e.gamma);
}

}  // namespace

TEST_CASE("gauss_legendre small orders are the closed-form rules") {
  const QuadratureRule k1 = gauss_legendre(1);
  REQUIRE(k1.order() == 1);
  CHECK(k1.nodes[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(k1.weights[0] == doctest::Approx(2.0).epsilon(1e-15));

  const QuadratureRule k2 = gauss_legendre(2);
  CHECK(std::abs(k2.nodes[0] + 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(std::abs(k2.nodes[1] - 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(std::abs(k2.weights[0] - 1.0) < 1e-15);
  CHECK(std::abs(k2.weights[1] - 1.0) < 1e-15);

  const QuadratureRule k3 = gauss_legendre(3);
  CHECK(std::abs(k3.nodes[0] + std::sqrt(0.6)) < 1e-15);
  CHECK(std::abs(k3.nodes[1]) < 1e-15);
  CHECK(std::abs(k3.nodes[2] - std::sqrt(0.6)) < 1e-15);
  CHECK(std::abs(k3.weights[0] - 5.0 / 9.0) < 1e-15);
  CHECK(std::abs(k3.weights[1] - 8.0 / 9.0) < 1e-15);
  CHECK(std::abs(k3.weights[2] - 5.0 / 9.0) < 1e-15);
}

TEST_CASE("gauss_legendre integrates Legendre products exactly up to K = 32") {
  for (int K = 1; K <= 32; ++K) {
    const QuadratureRule q = gauss_legendre(K);
    for (int j = 0; j < K; ++j) {
      for (int k = 0; k < K; ++k) {
        double s = 0.0;
        for (int i = 0; i < K; ++i) s += q.weights[i] * legendre_assoc(j, 0, q.nodes[i]) * legendre_assoc(k, 0, q.nodes[i]);
        const double expected = j == k ? 2.0 / (2 * k + 1) : 0.0;
        REQUIRE(std::abs(s - expected) < 1e-9);
      }
    }
  }
}

TEST_CASE("legendre_assoc matches hand-differentiated P_4^2 at 0.5") {
  // P_4 = (35x^4 - 30x^2 + 3)/8, second derivative (420x^2 - 60)/8, times (1 - x^2).
  const double x = 0.5;
  const double expected = (1.0 - x * x) * (420.0 * x * x - 60.0) / 8.0;
  CHECK(std::abs(legendre_assoc(4, 2, x) - expected) < 1e-13);
  CHECK(std::abs(legendre_assoc(0, 0, 0.3) - 1.0) < 1e-15);
  CHECK(std::abs(legendre_assoc(1, 1, 0.6) - 0.8) < 1e-15);
}

TEST_CASE("legendre_assoc satisfies the three-term recurrence in l") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    const int m = static_cast<int>(rng() % 6);
    const int l = m + 1 + static_cast<int>(rng() % 6);
    const double x = uniform(rng, -1.0, 1.0);
    const double lhs = (l - m + 1) * legendre_assoc(l + 1, m, x);
    const double rhs = (2 * l + 1) * x * legendre_assoc(l, m, x) - (l + m) * legendre_assoc(l - 1, m, x);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("legendre_assoc rejects out-of-domain arguments") {
  CHECK_THROWS_AS(legendre_assoc(2, 3, 0.1), DomainError);
  CHECK_THROWS_AS(legendre_assoc(2, -1, 0.1), DomainError);
  CHECK_THROWS_AS(legendre_assoc(2, 1, 1.5), DomainError);
}

TEST_CASE("real spherical harmonics are orthonormal up to degree 6") {
  const QuadratureRule gl = gauss_legendre(16);
  const int n_phi = 32;
  const int L = 7;
  std::vector<std::vector<double>> samples;  // [l*l + l + m][point]
  for (int l = 0; l < L; ++l) {
    for (int m = -l; m <= l; ++m) {
      std::vector<double> v;
      for (int i = 0; i < gl.order(); ++i) {
        for (int j = 0; j < n_phi; ++j) {
          v.push_back(real_spherical_harmonic(l, m, SphericalAngle::make(std::acos(gl.nodes[i]), 2.0 * kPi * j / n_phi)));
        }
      }
      samples.push_back(std::move(v));
    }
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = 0; b < samples.size(); ++b) {
      double s = 0.0;
      std::size_t p = 0;
      for (int i = 0; i < gl.order(); ++i) {
        for (int j = 0; j < n_phi; ++j, ++p) s += gl.weights[i] * (2.0 * kPi / n_phi) * samples[a][p] * samples[b][p];
      }
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("real spherical harmonics carry no Condon-Shortley phase") {
  // Y_1^1 = sqrt(3 / 4 pi) x, positive along +x.
  const double y = real_spherical_harmonic(1, 1, SphericalAngle::make(kPi / 2, 0.0));
  CHECK(std::abs(y - std::sqrt(3.0 / (4.0 * kPi))) < 1e-15);
}

TEST_CASE("wigner_d_pair trivial cases") {
  for (double beta : {0.0, 0.4, 1.7, kPi}) {
    const WignerDPair p = wigner_d_pair(0, 0, 0, beta);
    CHECK(std::abs(p.d1 - 1.0) < 1e-15);
    CHECK(std::abs(p.d2) < 1e-15);
  }
  const EulerZYZ identity{};
  for (int l = 0; l <= 4; ++l) {
    for (int m1 = -l; m1 <= l; ++m1) {
      for (int m2 = -l; m2 <= l; ++m2) {
        CHECK(std::abs(two_term(l, m1, m2, identity) - (m1 == m2 ? 1.0 : 0.0)) < 1e-13);
      }
    }
  }
  CHECK_THROWS_AS(wigner_d_pair(2, 3, 0, 0.1), DomainError);
  CHECK_THROWS_AS(wigner_d_pair(2, 0, 0, -0.1), DomainError);
  CHECK_THROWS_AS(wigner_d_pair(2, 0, 0, 4.0), DomainError);
}

TEST_CASE("two-term form at l=2, m1=1, m2=-1, beta=pi/3 matches the sphere projection") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const EulerZYZ e{uniform(rng, 0.0, 2 * kPi), kPi / 3, uniform(rng, 0.0, 2 * kPi)};
    CHECK(std::abs(two_term(2, 1, -1, e) - sphere_projection_D(2, 1, -1, e)) < 1e-10);
  }
}

TEST_CASE("two-term form reproduces the full real Wigner matrix for l <= 4") {
  std::mt19937_64 rng(12);
  double worst_projection = 0.0;
  double worst_matrix = 0.0;
  for (int t = 0; t < 100; ++t) {
    const EulerZYZ e{uniform(rng, 0.0, 2 * kPi), std::acos(uniform(rng, -1.0, 1.0)), uniform(rng, 0.0, 2 * kPi)};
    for (int l = 0; l <= 4; ++l) {
      const std::vector<double> D = wigner_D_matrix(l, e);
      for (int m1 = -l; m1 <= l; ++m1) {
        for (int m2 = -l; m2 <= l; ++m2) {
          const double f = two_term(l, m1, m2, e);
          worst_matrix = std::max(worst_matrix, std::abs(f - D[(m1 + l) * (2 * l + 1) + (m2 + l)]));
          // The projection oracle is costly; spot-check it on a subset.
          if (t < 10) worst_projection = std::max(worst_projection, std::abs(f - sphere_projection_D(l, m1, m2, e)));
        }
      }
    }
  }
  CHECK(worst_matrix < 1e-10);
  CHECK(worst_projection < 1e-10);
}

TEST_CASE("real_small_d is the beta-only Wigner matrix") {
  const double beta = 0.9;
  for (int l = 0; l <= 4; ++l) {
    const std::vector<double> B = real_small_d(l, beta);
    const std::vector<double> D = wigner_D_matrix(l, EulerZYZ{0.0, beta, 0.0});
    CHECK(testing_support::max_abs_diff(B, D) < 1e-12);
  }
}
