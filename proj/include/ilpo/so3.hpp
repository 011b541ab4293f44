#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ilpo/special_functions.hpp"

namespace ilpo {

/// Rotation R = Rz(alpha) Ry(beta) Rz(gamma).
struct EulerZYZ {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// Row-major 3x3 matrix.
using Matrix3 = std::array<double, 9>;

Matrix3 euler_to_matrix(const EulerZYZ& e);
/// Inverse of euler_to_matrix with alpha, gamma in [0, 2 pi), beta in [0, pi].
EulerZYZ matrix_to_euler(const Matrix3& m);
Matrix3 matmul(const Matrix3& a, const Matrix3& b);
/// Euler angles of euler_to_matrix(a) * euler_to_matrix(b).
EulerZYZ compose(const EulerZYZ& a, const EulerZYZ& b);

/// K^3 sampling of SO(3): regular alpha and gamma, beta at arccos of the
/// Gauss-Legendre nodes (ascending in beta). Flat storage order is
/// (alpha, beta, gamma) with alpha slowest.
class SO3Grid {
 public:
  explicit SO3Grid(int K);

  int K() const { return K_; }
  std::size_t size() const { return static_cast<std::size_t>(K_) * K_ * K_; }
  std::size_t index(int q, int r, int s) const {
    return (static_cast<std::size_t>(q) * K_ + r) * K_ + s;
  }

  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<double>& betas() const { return betas_; }
  const std::vector<double>& gammas() const { return gammas_; }
  const std::vector<double>& beta_weights() const { return beta_weights_; }

  /// Full quadrature weight (2 pi / K)^2 w_r of any sample in beta row r.
  double weight(int r) const { return measure_weights_[static_cast<std::size_t>(r)]; }

  EulerZYZ rotation(int q, int r, int s) const { return {alphas_[q], betas_[r], gammas_[s]}; }
  EulerZYZ rotation(std::size_t flat) const;

 private:
  int K_;
  std::vector<double> alphas_;
  std::vector<double> betas_;
  std::vector<double> gammas_;
  std::vector<double> beta_weights_;
  std::vector<double> measure_weights_;
};

SO3Grid make_so3_grid(int K);

/// Real Wigner coefficients h^l_{m1 m2} for l < L, stored degree by degree,
/// each degree a row-major (2l+1)x(2l+1) block indexed [m1 + l][m2 + l].
class WignerCoefficients {
 public:
  WignerCoefficients() = default;
  explicit WignerCoefficients(int L);

  /// Number of coefficients for band limit L: L(2L-1)(2L+1)/3.
  static std::size_t count(int L) {
    return static_cast<std::size_t>(L) * (2 * L - 1) * (2 * L + 1) / 3;
  }
  static std::size_t offset(int l) { return count(l); }
  static std::size_t flat_index(int l, int m1, int m2) {
    return offset(l) + static_cast<std::size_t>((m1 + l) * (2 * l + 1) + (m2 + l));
  }

  int L() const { return L_; }
  double& operator()(int l, int m1, int m2) { return values_[flat_index(l, m1, m2)]; }
  double operator()(int l, int m1, int m2) const { return values_[flat_index(l, m1, m2)]; }
  std::span<double> degree(int l);
  std::span<const double> degree(int l) const;
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// Set when the coefficients came from a grid too coarse for exact recovery.
  bool approximate() const { return approximate_; }
  void set_approximate(bool v) { approximate_ = v; }

 private:
  int L_ = 0;
  std::vector<double> values_;
  bool approximate_ = false;
};

/// Weighted 2-norm sqrt(sum 8 pi^2 / (2l+1) |h^l_{m1 m2}|^2).
double so3_norm(const WignerCoefficients& c);

/// Single real Wigner matrix element, assembled from the separable d-pair form.
double wigner_D_real(int l, int m1, int m2, const EulerZYZ& e);

/// Full (2l+1)x(2l+1) real Wigner matrix at e, row-major [m1 + l][m2 + l].
/// Satisfies Y_l^{m1}(R x) = sum_{m2} D_{m1 m2}(R) Y_l^{m2}(x) and
/// D(R1 R2) = D(R1) D(R2). Accepts any real beta.
std::vector<double> wigner_D_matrix(int l, const EulerZYZ& e);

/// Precomputed d-pair and C_m tables for one (grid, band limit) pair, with the
/// factored synthesis h(q, r, s) = sum_l sum_{m1 m2} h^l_{m1 m2} D^l_{m1 m2}(R_qrs)
/// and its adjoint. Immutable after construction and safe to share across threads.
class GridWignerTable {
 public:
  GridWignerTable(const SO3Grid& grid, int L);

  int K() const { return K_; }
  int L() const { return L_; }
  std::size_t grid_size() const { return static_cast<std::size_t>(K_) * K_ * K_; }
  std::size_t coefficient_count() const { return WignerCoefficients::count(L_); }

  /// Contract over l with d-pairs, then m1 with C(m1 alpha), then m2 with
  /// C(m2 gamma). `coeffs` uses the WignerCoefficients layout, `out` has K^3
  /// entries in grid order. Cost O(K^3 L) per call.
  void synthesize(std::span<const double> coeffs, std::span<double> out) const;

  /// Adjoint of synthesize: coeffs[l, m1, m2] = sum_qrs values[qrs] D^l_{m1 m2}(R_qrs).
  /// No quadrature weights are applied.
  void analyze(std::span<const double> values, std::span<double> coeffs) const;

  /// D^l_{m1 m2} at grid sample (q, r, s) from the tables.
  double element(int l, int m1, int m2, int q, int r, int s) const;

 private:
  int K_;
  int L_;
  int M_;  // 2L - 1
  // [r][m1][m2][l] -> d1, d2 (zero where l < max(|m1|, |m2|))
  std::vector<double> d1_;
  std::vector<double> d2_;
  // [q][m + L - 1] -> C_m(m alpha_q), C_{-m}(m alpha_q); same for gamma
  std::vector<double> alpha_first_;
  std::vector<double> alpha_second_;
  std::vector<double> gamma_first_;
  std::vector<double> gamma_second_;

  std::size_t d_index(int r, int mi, int mj, int l) const {
    return ((static_cast<std::size_t>(r) * M_ + mi) * M_ + mj) * L_ + l;
  }
};

/// Weighted quadrature sum over the grid. Throws ShapeError on size mismatch.
double integrate_so3(const SO3Grid& grid, std::span<const double> values);

/// h^l_{m1 m2} = (2l+1)/(8 pi^2) * quadrature of h D^l_{m1 m2}. Exact for
/// band-limited input when K >= 2L - 1; coarser grids set approximate().
WignerCoefficients decompose_so3(const SO3Grid& grid, std::span<const double> values, int L);

/// Finite Wigner sum at one rotation.
double synthesize_so3(const WignerCoefficients& c, const EulerZYZ& e);

/// Coefficients c' with synthesize(c', R) = synthesize(c, R * R_e), i.e.
/// c'^l = c^l D^l(R_e)^T per degree.
WignerCoefficients rotate_so3_function(const WignerCoefficients& c, const EulerZYZ& e);

/// Band-limited function on SO(3) given by its Wigner coefficients.
struct SO3Function {
  WignerCoefficients coefficients;
  /// Reuse the Wigner table across sample() calls on grids of the same size.
  bool cache_tables = true;

  double operator()(const EulerZYZ& e) const { return synthesize_so3(coefficients, e); }
  std::vector<double> sample(const SO3Grid& grid) const;
};

/// Process-wide table for make_so3_grid(K) and band limit L, built on first use.
/// Thread-safe.
std::shared_ptr<const GridWignerTable> shared_wigner_table(int K, int L);

}  // namespace ilpo
