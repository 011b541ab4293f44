#include "ilpo/special_functions.hpp"

#include <algorithm>
#include <array>
#include <complex>
#include <string>

#include "ilpo/error.hpp"

namespace ilpo {
namespace {

constexpr int kMaxFactorial = 64;

const std::array<double, kMaxFactorial + 1>& factorials() {
  static const auto table = [] {
    std::array<double, kMaxFactorial + 1> f{};
    f[0] = 1.0;
    for (int i = 1; i <= kMaxFactorial; ++i) f[i] = f[i - 1] * i;
    return f;
  }();
  return table;
}

double factorial(int n) { return factorials().at(static_cast<std::size_t>(n)); }

// (l - m)! / (l + m)! for 0 <= m <= l, without forming the factorials.
double factorial_ratio(int l, int m) {
  double r = 1.0;
  for (int k = l - m + 1; k <= l + m; ++k) r /= k;
  return r;
}

// Complex small-d matrix element d^l_{mp m}(beta), Wigner's explicit sum.
double complex_small_d(int l, int mp, int m, double beta) {
  const double c = std::cos(0.5 * beta);
  const double s = std::sin(0.5 * beta);
  const double pre =
      std::sqrt(factorial(l + mp) * factorial(l - mp) * factorial(l + m) * factorial(l - m));
  const int s_lo = std::max(0, m - mp);
  const int s_hi = std::min(l + m, l - mp);
  double sum = 0.0;
  for (int k = s_lo; k <= s_hi; ++k) {
    const double sign = ((mp - m + k) % 2 == 0) ? 1.0 : -1.0;
    const double denom = factorial(l + m - k) * factorial(k) * factorial(mp - m + k) *
                         factorial(l - mp - k);
    sum += sign / denom * std::pow(c, 2 * l + m - mp - 2 * k) * std::pow(s, mp - m + 2 * k);
  }
  return pre * sum;
}

}  // namespace

SphericalAngle SphericalAngle::make(double polar, double azimuthal) {
  if (!(polar >= 0.0 && polar <= kPi)) {
    throw DomainError("polar angle " + std::to_string(polar) + " outside [0, pi]");
  }
  double phi = std::fmod(azimuthal, 2.0 * kPi);
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi >= 2.0 * kPi) phi = 0.0;
  return SphericalAngle{polar, phi};
}

SphericalAngle SphericalAngle::from_cartesian(double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) return SphericalAngle{0.0, 0.0};
  const double cos_polar = std::clamp(z / r, -1.0, 1.0);
  return make(std::acos(cos_polar), std::atan2(y, x));
}

double legendre_assoc(int l, int m, double x) {
  if (l < 0 || m < 0 || m > l) {
    throw DomainError("legendre_assoc: need 0 <= m <= l, got l=" + std::to_string(l) +
                      " m=" + std::to_string(m));
  }
  if (!(std::abs(x) <= 1.0)) {
    throw DomainError("legendre_assoc: |x| > 1");
  }
  // P_m^m = (2m-1)!! (1-x^2)^{m/2}
  double pmm = 1.0;
  const double somx2 = std::sqrt((1.0 - x) * (1.0 + x));
  double odd = 1.0;
  for (int i = 1; i <= m; ++i) {
    pmm *= odd * somx2;
    odd += 2.0;
  }
  if (l == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = ((2.0 * ll - 1.0) * x * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

double real_spherical_harmonic(int l, int m, const SphericalAngle& angle) {
  if (l < 0 || std::abs(m) > l) {
    throw DomainError("real_spherical_harmonic: need |m| <= l, got l=" + std::to_string(l) +
                      " m=" + std::to_string(m));
  }
  const int am = std::abs(m);
  const double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * factorial_ratio(l, am));
  const double p = legendre_assoc(l, am, std::cos(angle.polar));
  if (m == 0) return norm * p;
  const double phase = (m > 0) ? std::cos(m * angle.azimuthal) : std::sin(am * angle.azimuthal);
  return std::sqrt(2.0) * norm * p * phase;
}

QuadratureRule gauss_legendre(int order) {
  if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
  const int K = order;
  QuadratureRule rule;
  rule.nodes.assign(K, 0.0);
  rule.weights.assign(K, 0.0);
  const int half = (K + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (K + 0.5));
    double dp = 0.0;
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= K; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // p1 = P_K(x), p0 = P_{K-1}(x)
      dp = K * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NumericalError("gauss_legendre: Newton iteration did not converge for order " +
                           std::to_string(K));
    }
    // derivative at the converged root
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= K; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = K * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    if (2 * i + 1 == K) x = 0.0;
    rule.nodes[K - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[K - 1 - i] = w;
    rule.weights[i] = w;
  }
  return rule;
}

std::vector<double> real_small_d(int l, double beta) {
  if (l < 0) throw DomainError("real_small_d: negative degree");
  const int n = 2 * l + 1;
  using cplx = std::complex<double>;
  // Rows: real harmonic index, columns: complex (Condon-Shortley) harmonic index.
  std::vector<cplx> U(static_cast<std::size_t>(n * n), cplx{0.0, 0.0});
  auto u = [&](int a, int b) -> cplx& { return U[(a + l) * n + (b + l)]; };
  const double r2 = 1.0 / std::sqrt(2.0);
  u(0, 0) = 1.0;
  for (int m = 1; m <= l; ++m) {
    const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
    u(m, m) = sgn * r2;
    u(m, -m) = r2;
    u(-m, m) = cplx{0.0, -sgn * r2};
    u(-m, -m) = cplx{0.0, r2};
  }
  // Y_c^m(R_y x) = sum_mp d_{m mp}(beta) Y_c^mp(x)
  std::vector<double> T(static_cast<std::size_t>(n * n));
  for (int m = -l; m <= l; ++m) {
    for (int mp = -l; mp <= l; ++mp) T[(m + l) * n + (mp + l)] = complex_small_d(l, m, mp, beta);
  }
  // B = U T U^H
  std::vector<cplx> UT(static_cast<std::size_t>(n * n), cplx{0.0, 0.0});
  for (int a = 0; a < n; ++a) {
    for (int d = 0; d < n; ++d) {
      cplx acc{0.0, 0.0};
      for (int b = 0; b < n; ++b) acc += U[a * n + b] * T[b * n + d];
      UT[a * n + d] = acc;
    }
  }
  std::vector<double> B(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < n; ++c) {
      cplx acc{0.0, 0.0};
      for (int d = 0; d < n; ++d) acc += UT[a * n + d] * std::conj(U[c * n + d]);
      B[a * n + c] = acc.real();
    }
  }
  return B;
}

std::vector<WignerDPair> wigner_d_pairs(int l, double beta) {
  const int n = 2 * l + 1;
  const std::vector<double> B = real_small_d(l, beta);
  auto b = [&](int a, int c) { return B[(a + l) * n + (c + l)]; };
  std::vector<WignerDPair> out(static_cast<std::size_t>(n * n));
  for (int m1 = -l; m1 <= l; ++m1) {
    for (int m2 = -l; m2 <= l; ++m2) {
      WignerDPair& p = out[(m1 + l) * n + (m2 + l)];
      if (m1 == 0 && m2 == 0) {
        p = {b(0, 0), 0.0};
        continue;
      }
      // Coefficients of D on the {cos, sin}(|m1| alpha) x {cos, sin}(|m2| gamma) basis.
      const double tau1 = m1 > 0 ? -1.0 : 1.0;
      const double sigma2 = m2 > 0 ? 1.0 : -1.0;
      const double A[2][2] = {{b(m1, m2), sigma2 * b(m1, -m2)},
                              {tau1 * b(-m1, m2), tau1 * sigma2 * b(-m1, -m2)}};
      // C_m(m x) and C_{-m}(m x) expressed on the same basis.
      auto first = [](int m) { return m >= 0 ? std::array<double, 2>{1, 0} : std::array<double, 2>{0, -1}; };
      auto second = [](int m) { return m > 0 ? std::array<double, 2>{0, 1} : std::array<double, 2>{1, 0}; };
      auto project = [&](const std::array<double, 2>& x, const std::array<double, 2>& y) {
        double s = 0.0;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) s += x[i] * A[i][j] * y[j];
        return s;
      };
      p.d1 = project(first(m1), first(m2));
      p.d2 = project(second(m1), second(m2));
    }
  }
  return out;
}

WignerDPair wigner_d_pair(int l, int m1, int m2, double beta) {
  if (l < 0 || std::abs(m1) > l || std::abs(m2) > l) {
    throw DomainError("wigner_d_pair: need |m1|, |m2| <= l");
  }
  if (!(beta >= 0.0 && beta <= kPi)) throw DomainError("wigner_d_pair: beta outside [0, pi]");
  const int n = 2 * l + 1;
  return wigner_d_pairs(l, beta)[(m1 + l) * n + (m2 + l)];
}

}  // namespace ilpo
