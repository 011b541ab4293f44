#pragma once

#include <cmath>
#include <vector>

namespace ilpo {

inline constexpr double kPi = 3.14159265358979323846;

/// Point on the unit sphere. `polar` in [0, pi], `azimuthal` in [0, 2 pi).
struct SphericalAngle {
  double polar = 0.0;
  double azimuthal = 0.0;

  /// Validates the polar angle and wraps the azimuth into [0, 2 pi).
  static SphericalAngle make(double polar, double azimuthal);
  /// Direction of a nonzero vector. The zero vector maps to (0, 0).
  static SphericalAngle from_cartesian(double x, double y, double z);
};

/// Gauss-Legendre rule on [-1, 1]; nodes ascending.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int order() const { return static_cast<int>(nodes.size()); }
};

/// Associated Legendre function P_l^m(x) without the Condon-Shortley phase.
/// Throws DomainError unless 0 <= m <= l and |x| <= 1.
double legendre_assoc(int l, int m, double x);

/// Real orthonormal spherical harmonic. m > 0 carries cos(m phi), m < 0 carries
/// sin(|m| phi); no Condon-Shortley phase.
double real_spherical_harmonic(int l, int m, const SphericalAngle& angle);

/// K-point Gauss-Legendre rule from Newton iteration on P_K.
/// Throws NumericalError if a root fails to converge within 100 iterations.
QuadratureRule gauss_legendre(int order);

/// C_m(x): cos(x) for m >= 0, sin(x) for m < 0.
inline double cos_sin(int m, double x) { return m >= 0 ? std::cos(x) : std::sin(x); }

/// The two beta-dependent factors of the separable real Wigner matrix
///
///   D^l_{m1 m2}(a, b, g) = C_{m1}(m1 a) d1(b) C_{m2}(m2 g) + C_{-m1}(m1 a) d2(b) C_{-m2}(m2 g).
struct WignerDPair {
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Real-basis matrix of a rotation by `beta` about the Y axis, row-major
/// (2l+1)x(2l+1) indexed [m1 + l][m2 + l], defined by
/// Y_l^{m1}(R_y(beta) x) = sum_{m2} B_{m1 m2} Y_l^{m2}(x).
///
/// Built from Wigner's factorial-sum formula for the complex small-d matrix and
/// the real/complex change of basis. Intended for l <= 16.
std::vector<double> real_small_d(int l, double beta);

/// All (2l+1)^2 d-pairs of degree l at `beta`, indexed [m1 + l][m2 + l].
std::vector<WignerDPair> wigner_d_pairs(int l, double beta);

/// Single d-pair. Throws DomainError outside |m1|,|m2| <= l, beta in [0, pi].
WignerDPair wigner_d_pair(int l, int m1, int m2, double beta);

}  // namespace ilpo
