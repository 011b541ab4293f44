#include "ilpo/so3.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "ilpo/error.hpp"

namespace ilpo {
namespace {

double wrap_two_pi(double x) {
  double y = std::fmod(x, 2.0 * kPi);
  if (y < 0.0) y += 2.0 * kPi;
  if (y >= 2.0 * kPi) y = 0.0;
  return y;
}

void check_degree_orders(int l, int m1, int m2) {
  if (l < 0 || std::abs(m1) > l || std::abs(m2) > l) {
    throw DomainError("Wigner index out of range: l=" + std::to_string(l) +
                      " m1=" + std::to_string(m1) + " m2=" + std::to_string(m2));
  }
}

// Per-thread scratch reused by the table kernels.
std::vector<double>& scratch(std::size_t n) {
  thread_local std::vector<double> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

}  // namespace

Matrix3 euler_to_matrix(const EulerZYZ& e) {
  const double ca = std::cos(e.alpha), sa = std::sin(e.alpha);
  const double cb = std::cos(e.beta), sb = std::sin(e.beta);
  const double cg = std::cos(e.gamma), sg = std::sin(e.gamma);
  const Matrix3 rz_a{ca, -sa, 0, sa, ca, 0, 0, 0, 1};
  const Matrix3 ry_b{cb, 0, sb, 0, 1, 0, -sb, 0, cb};
  const Matrix3 rz_g{cg, -sg, 0, sg, cg, 0, 0, 0, 1};
  return matmul(matmul(rz_a, ry_b), rz_g);
}

Matrix3 matmul(const Matrix3& a, const Matrix3& b) {
  Matrix3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i * 3 + k] * b[k * 3 + j];
      c[i * 3 + j] = s;
    }
  return c;
}

EulerZYZ matrix_to_euler(const Matrix3& m) {
  const double cb = std::clamp(m[8], -1.0, 1.0);
  const double beta = std::acos(cb);
  const double sb = std::sqrt(m[2] * m[2] + m[5] * m[5]);
  EulerZYZ e;
  e.beta = beta;
  if (sb > 1e-12) {
    e.alpha = std::atan2(m[5], m[2]);
    e.gamma = std::atan2(m[7], -m[6]);
  } else if (cb > 0.0) {
    // R = Rz(alpha + gamma)
    e.alpha = std::atan2(m[3], m[0]);
    e.gamma = 0.0;
  } else {
    // R = Rz(alpha) Ry(pi)
    e.alpha = std::atan2(-m[3], m[4]);
    e.gamma = 0.0;
  }
  e.alpha = wrap_two_pi(e.alpha);
  e.gamma = wrap_two_pi(e.gamma);
  return e;
}

EulerZYZ compose(const EulerZYZ& a, const EulerZYZ& b) {
  return matrix_to_euler(matmul(euler_to_matrix(a), euler_to_matrix(b)));
}

SO3Grid::SO3Grid(int K) : K_(K) {
  if (K < 1) throw DomainError("SO3Grid: K must be >= 1");
  const QuadratureRule rule = gauss_legendre(K);
  alphas_.resize(K);
  gammas_.resize(K);
  betas_.resize(K);
  beta_weights_.resize(K);
  measure_weights_.resize(K);
  const double step = 2.0 * kPi / K;
  for (int q = 0; q < K; ++q) {
    alphas_[q] = q * step;
    gammas_[q] = q * step;
  }
  // nodes ascend in cos(beta), so reverse them to ascend in beta
  for (int r = 0; r < K; ++r) {
    betas_[r] = std::acos(rule.nodes[K - 1 - r]);
    beta_weights_[r] = rule.weights[K - 1 - r];
    measure_weights_[r] = step * step * beta_weights_[r];
  }
}

EulerZYZ SO3Grid::rotation(std::size_t flat) const {
  const std::size_t k = static_cast<std::size_t>(K_);
  const int s = static_cast<int>(flat % k);
  const int r = static_cast<int>((flat / k) % k);
  const int q = static_cast<int>(flat / (k * k));
  return rotation(q, r, s);
}

SO3Grid make_so3_grid(int K) { return SO3Grid(K); }

WignerCoefficients::WignerCoefficients(int L) : L_(L) {
  if (L < 0) throw DomainError("WignerCoefficients: negative band limit");
  values_.assign(count(L), 0.0);
}

std::span<double> WignerCoefficients::degree(int l) {
  return std::span<double>(values_).subspan(offset(l), static_cast<std::size_t>((2 * l + 1) * (2 * l + 1)));
}

std::span<const double> WignerCoefficients::degree(int l) const {
  return std::span<const double>(values_).subspan(offset(l), static_cast<std::size_t>((2 * l + 1) * (2 * l + 1)));
}

double so3_norm(const WignerCoefficients& c) {
  double s = 0.0;
  for (int l = 0; l < c.L(); ++l) {
    const double w = 8.0 * kPi * kPi / (2 * l + 1);
    for (double v : c.degree(l)) s += w * v * v;
  }
  return std::sqrt(s);
}

std::vector<double> wigner_D_matrix(int l, const EulerZYZ& e) {
  if (l < 0) throw DomainError("wigner_D_matrix: negative degree");
  const int n = 2 * l + 1;
  const std::vector<WignerDPair> pairs = wigner_d_pairs(l, e.beta);
  std::vector<double> D(static_cast<std::size_t>(n * n));
  for (int m1 = -l; m1 <= l; ++m1) {
    const double a1 = cos_sin(m1, m1 * e.alpha);
    const double a2 = cos_sin(-m1, m1 * e.alpha);
    for (int m2 = -l; m2 <= l; ++m2) {
      const WignerDPair& p = pairs[(m1 + l) * n + (m2 + l)];
      D[(m1 + l) * n + (m2 + l)] = a1 * p.d1 * cos_sin(m2, m2 * e.gamma) +
                                   a2 * p.d2 * cos_sin(-m2, m2 * e.gamma);
    }
  }
  return D;
}

double wigner_D_real(int l, int m1, int m2, const EulerZYZ& e) {
  check_degree_orders(l, m1, m2);
  const WignerDPair p = wigner_d_pair(l, m1, m2, e.beta);
  return cos_sin(m1, m1 * e.alpha) * p.d1 * cos_sin(m2, m2 * e.gamma) +
         cos_sin(-m1, m1 * e.alpha) * p.d2 * cos_sin(-m2, m2 * e.gamma);
}

GridWignerTable::GridWignerTable(const SO3Grid& grid, int L)
    : K_(grid.K()), L_(L), M_(2 * L - 1) {
  if (L < 1) throw DomainError("GridWignerTable: band limit must be >= 1");
  d1_.assign(static_cast<std::size_t>(K_) * M_ * M_ * L_, 0.0);
  d2_.assign(d1_.size(), 0.0);
  for (int r = 0; r < K_; ++r) {
    for (int l = 0; l < L_; ++l) {
      const int n = 2 * l + 1;
      const std::vector<WignerDPair> pairs = wigner_d_pairs(l, grid.betas()[r]);
      for (int m1 = -l; m1 <= l; ++m1)
        for (int m2 = -l; m2 <= l; ++m2) {
          const WignerDPair& p = pairs[(m1 + l) * n + (m2 + l)];
          const std::size_t i = d_index(r, m1 + L_ - 1, m2 + L_ - 1, l);
          d1_[i] = p.d1;
          d2_[i] = p.d2;
        }
    }
  }
  const std::size_t tsize = static_cast<std::size_t>(K_) * M_;
  alpha_first_.resize(tsize);
  alpha_second_.resize(tsize);
  gamma_first_.resize(tsize);
  gamma_second_.resize(tsize);
  for (int q = 0; q < K_; ++q) {
    for (int m = -(L_ - 1); m <= L_ - 1; ++m) {
      const std::size_t i = static_cast<std::size_t>(q) * M_ + (m + L_ - 1);
      alpha_first_[i] = cos_sin(m, m * grid.alphas()[q]);
      alpha_second_[i] = cos_sin(-m, m * grid.alphas()[q]);
      gamma_first_[i] = cos_sin(m, m * grid.gammas()[q]);
      gamma_second_[i] = cos_sin(-m, m * grid.gammas()[q]);
    }
  }
}

void GridWignerTable::synthesize(std::span<const double> coeffs, std::span<double> out) const {
  if (coeffs.size() != coefficient_count() || out.size() != grid_size()) {
    throw ShapeError("GridWignerTable::synthesize: size mismatch");
  }
  const int M = M_;
  const int off = L_ - 1;
  const std::size_t mm = static_cast<std::size_t>(M) * M;
  std::vector<double>& buf = scratch(2 * K_ * mm + 2 * M);
  double* A1 = buf.data();
  double* A2 = A1 + K_ * mm;
  double* b1 = A2 + K_ * mm;
  double* b2 = b1 + M;

  // contract over l
  for (int r = 0; r < K_; ++r) {
    for (int mi = 0; mi < M; ++mi) {
      const int m1 = mi - off;
      for (int mj = 0; mj < M; ++mj) {
        const int m2 = mj - off;
        const int lmin = std::max(std::abs(m1), std::abs(m2));
        double s1 = 0.0, s2 = 0.0;
        for (int l = lmin; l < L_; ++l) {
          const double c = coeffs[WignerCoefficients::flat_index(l, m1, m2)];
          const std::size_t di = d_index(r, mi, mj, l);
          s1 += d1_[di] * c;
          s2 += d2_[di] * c;
        }
        A1[r * mm + mi * M + mj] = s1;
        A2[r * mm + mi * M + mj] = s2;
      }
    }
  }
  for (int q = 0; q < K_; ++q) {
    const double* af = &alpha_first_[static_cast<std::size_t>(q) * M];
    const double* as = &alpha_second_[static_cast<std::size_t>(q) * M];
    for (int r = 0; r < K_; ++r) {
      // contract over m1
      for (int mj = 0; mj < M; ++mj) {
        double s1 = 0.0, s2 = 0.0;
        for (int mi = 0; mi < M; ++mi) {
          s1 += af[mi] * A1[r * mm + mi * M + mj];
          s2 += as[mi] * A2[r * mm + mi * M + mj];
        }
        b1[mj] = s1;
        b2[mj] = s2;
      }
      // contract over m2
      double* dst = &out[(static_cast<std::size_t>(q) * K_ + r) * K_];
      for (int s = 0; s < K_; ++s) {
        const double* gf = &gamma_first_[static_cast<std::size_t>(s) * M];
        const double* gs = &gamma_second_[static_cast<std::size_t>(s) * M];
        double v1 = 0.0, v2 = 0.0;
        for (int mj = 0; mj < M; ++mj) {
          v1 += gf[mj] * b1[mj];
          v2 += gs[mj] * b2[mj];
        }
        dst[s] = v1 + v2;
      }
    }
  }
}

void GridWignerTable::analyze(std::span<const double> values, std::span<double> coeffs) const {
  if (coeffs.size() != coefficient_count() || values.size() != grid_size()) {
    throw ShapeError("GridWignerTable::analyze: size mismatch");
  }
  const int M = M_;
  const int off = L_ - 1;
  const std::size_t mm = static_cast<std::size_t>(M) * M;
  std::vector<double>& buf = scratch(2 * K_ * mm + 2 * M);
  double* F1 = buf.data();
  double* F2 = F1 + K_ * mm;
  double* e1 = F2 + K_ * mm;
  double* e2 = e1 + M;
  std::fill(F1, F1 + 2 * K_ * mm, 0.0);

  for (int q = 0; q < K_; ++q) {
    const double* af = &alpha_first_[static_cast<std::size_t>(q) * M];
    const double* as = &alpha_second_[static_cast<std::size_t>(q) * M];
    for (int r = 0; r < K_; ++r) {
      const double* src = &values[(static_cast<std::size_t>(q) * K_ + r) * K_];
      for (int mj = 0; mj < M; ++mj) {
        double s1 = 0.0, s2 = 0.0;
        for (int s = 0; s < K_; ++s) {
          s1 += gamma_first_[static_cast<std::size_t>(s) * M + mj] * src[s];
          s2 += gamma_second_[static_cast<std::size_t>(s) * M + mj] * src[s];
        }
        e1[mj] = s1;
        e2[mj] = s2;
      }
      for (int mi = 0; mi < M; ++mi) {
        for (int mj = 0; mj < M; ++mj) {
          F1[r * mm + mi * M + mj] += af[mi] * e1[mj];
          F2[r * mm + mi * M + mj] += as[mi] * e2[mj];
        }
      }
    }
  }
  for (int l = 0; l < L_; ++l) {
    for (int m1 = -l; m1 <= l; ++m1) {
      for (int m2 = -l; m2 <= l; ++m2) {
        const int mi = m1 + off, mj = m2 + off;
        double s = 0.0;
        for (int r = 0; r < K_; ++r) {
          const std::size_t di = d_index(r, mi, mj, l);
          s += d1_[di] * F1[r * mm + mi * M + mj] + d2_[di] * F2[r * mm + mi * M + mj];
        }
        coeffs[WignerCoefficients::flat_index(l, m1, m2)] = s;
      }
    }
  }
}

double GridWignerTable::element(int l, int m1, int m2, int q, int r, int s) const {
  const int mi = m1 + L_ - 1, mj = m2 + L_ - 1;
  const std::size_t di = d_index(r, mi, mj, l);
  const std::size_t qa = static_cast<std::size_t>(q) * M_ + mi;
  const std::size_t sg = static_cast<std::size_t>(s) * M_ + mj;
  return alpha_first_[qa] * d1_[di] * gamma_first_[sg] +
         alpha_second_[qa] * d2_[di] * gamma_second_[sg];
}

std::shared_ptr<const GridWignerTable> shared_wigner_table(int K, int L) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const GridWignerTable>> tables;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = tables[{K, L}];
  if (!slot) slot = std::make_shared<const GridWignerTable>(make_so3_grid(K), L);
  return slot;
}

double integrate_so3(const SO3Grid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) {
    throw ShapeError("integrate_so3: expected " + std::to_string(grid.size()) + " values, got " +
                     std::to_string(values.size()));
  }
  const int K = grid.K();
  double total = 0.0;
  for (int q = 0; q < K; ++q)
    for (int r = 0; r < K; ++r)
      for (int s = 0; s < K; ++s) total += grid.weight(r) * values[grid.index(q, r, s)];
  return total;
}

WignerCoefficients decompose_so3(const SO3Grid& grid, std::span<const double> values, int L) {
  if (values.size() != grid.size()) {
    throw ShapeError("decompose_so3: expected " + std::to_string(grid.size()) + " values, got " +
                     std::to_string(values.size()));
  }
  if (L < 1) throw DomainError("decompose_so3: band limit must be >= 1");
  const int K = grid.K();
  std::vector<double> weighted(values.size());
  for (int q = 0; q < K; ++q)
    for (int r = 0; r < K; ++r)
      for (int s = 0; s < K; ++s) {
        const std::size_t i = grid.index(q, r, s);
        weighted[i] = grid.weight(r) * values[i];
      }
  WignerCoefficients c(L);
  GridWignerTable(grid, L).analyze(weighted, c.values());
  for (int l = 0; l < L; ++l) {
    const double scale = (2 * l + 1) / (8.0 * kPi * kPi);
    for (double& v : c.degree(l)) v *= scale;
  }
  c.set_approximate(K < 2 * L - 1);
  return c;
}

double synthesize_so3(const WignerCoefficients& c, const EulerZYZ& e) {
  double total = 0.0;
  for (int l = 0; l < c.L(); ++l) {
    const std::vector<double> D = wigner_D_matrix(l, e);
    const std::span<const double> block = c.degree(l);
    for (std::size_t i = 0; i < D.size(); ++i) total += block[i] * D[i];
  }
  return total;
}

WignerCoefficients rotate_so3_function(const WignerCoefficients& c, const EulerZYZ& e) {
  WignerCoefficients out(c.L());
  for (int l = 0; l < c.L(); ++l) {
    const int n = 2 * l + 1;
    const std::vector<double> D = wigner_D_matrix(l, e);
    const std::span<const double> src = c.degree(l);
    const std::span<double> dst = out.degree(l);
    for (int a = 0; a < n; ++a)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int b = 0; b < n; ++b) s += src[a * n + b] * D[k * n + b];
        dst[a * n + k] = s;
      }
  }
  return out;
}

std::vector<double> SO3Function::sample(const SO3Grid& grid) const {
  std::vector<double> out(grid.size());
  if (coefficients.L() == 0) return out;
  if (cache_tables) {
    shared_wigner_table(grid.K(), coefficients.L())->synthesize(coefficients.values(), out);
  } else {
    GridWignerTable(grid, coefficients.L()).synthesize(coefficients.values(), out);
  }
  return out;
}

}  // namespace ilpo
