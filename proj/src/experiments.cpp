#include "ilpo/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ilpo/error.hpp"
#include "ilpo/io.hpp"

namespace ilpo {
namespace {

constexpr int kDenseGrid = 64;

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double sample_std(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

double pattern_search(const WignerCoefficients& c, EulerZYZ x) {
  double f = synthesize_so3(c, x);
  double step = 2.0 * kPi / kDenseGrid;
  while (step > 1e-10) {
    bool improved = false;
    for (int dim = 0; dim < 3; ++dim) {
      for (double dir : {1.0, -1.0}) {
        EulerZYZ y = x;
        double& coord = dim == 0 ? y.alpha : (dim == 1 ? y.beta : y.gamma);
        coord += dir * step;
        const double fy = synthesize_so3(c, y);
        if (fy > f) {
          x = y;
          f = fy;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return f;
}

}  // namespace

std::string ExperimentReport::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += "\n";
  }
  return out;
}

double ExperimentReport::metric(const std::string& key) const {
  for (const auto& [k, v] : summary)
    if (k == key) return v;
  if (rows.size() == 1) {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == key) return rows[0][i];
  }
  throw std::out_of_range("no summary entry '" + key + "' in " + name);
}

EulerZYZ random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> cosine(-1.0, 1.0);
  EulerZYZ e;
  e.alpha = angle(rng);
  e.beta = std::acos(cosine(rng));
  e.gamma = angle(rng);
  return e;
}

WignerCoefficients random_unit_coefficients(std::mt19937_64& rng, int L) {
  std::normal_distribution<double> normal(0.0, 1.0);
  WignerCoefficients c(L);
  for (double& v : c.values()) v = normal(rng);
  const double n = so3_norm(c);
  for (double& v : c.values()) v /= n;
  return c;
}

VoxelGrid random_voxels(std::mt19937_64& rng, int channels, int N) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VoxelGrid g(channels, N, N, N);
  for (double& v : g.values()) v = normal(rng);
  return g;
}

double sampled_max(const WignerCoefficients& c, int K) {
  const std::vector<double> h = SO3Function{c}.sample(make_so3_grid(K));
  return *std::max_element(h.begin(), h.end());
}

double sampled_softmax(const WignerCoefficients& c, int K) {
  const SO3Grid grid = make_so3_grid(K);
  const std::vector<double> h = SO3Function{c}.sample(grid);
  double num = 0.0, den = 0.0;
  return slice_ops::softmax(h, grid, 1e-12, num, den);
}

double true_max(const WignerCoefficients& c) {
  const SO3Grid grid = make_so3_grid(kDenseGrid);
  const std::vector<double> h = SO3Function{c}.sample(grid);
  std::vector<std::size_t> order(h.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t starts = std::min<std::size_t>(4, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                    [&](std::size_t a, std::size_t b) { return h[a] > h[b] || (h[a] == h[b] && a < b); });
  double best = h[order[0]];
  for (std::size_t i = 0; i < starts; ++i) best = std::max(best, pattern_search(c, grid.rotation(order[i])));
  return best;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 0.0 && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return 0.0;
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

std::vector<std::array<int, 9>> cube_rotations() {
  std::vector<std::array<int, 9>> out;
  std::array<int, 3> perm = {0, 1, 2};
  do {
    for (int signs = 0; signs < 8; ++signs) {
      std::array<int, 9> Q{};
      for (int row = 0; row < 3; ++row) Q[row * 3 + perm[row]] = (signs >> row) & 1 ? -1 : 1;
      const int det = Q[0] * (Q[4] * Q[8] - Q[5] * Q[7]) - Q[1] * (Q[3] * Q[8] - Q[5] * Q[6]) +
                      Q[2] * (Q[3] * Q[7] - Q[4] * Q[6]);
      if (det == 1) out.push_back(Q);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

VoxelGrid rotate_voxels(const VoxelGrid& in, const std::array<int, 9>& Q) {
  const int N = in.X();
  if (in.Y() != N || in.Z() != N) throw ShapeError("rotate_voxels needs a cubic grid, got " + in.shape_string());
  VoxelGrid out(in.channels(), N, N, N);
  for (int c = 0; c < in.channels(); ++c)
    for (int x = 0; x < N; ++x)
      for (int y = 0; y < N; ++y)
        for (int z = 0; z < N; ++z) {
          // doubled coordinates relative to the center keep half-integer centers exact
          const int p[3] = {2 * x - (N - 1), 2 * y - (N - 1), 2 * z - (N - 1)};
          int t[3];
          for (int row = 0; row < 3; ++row) t[row] = Q[row * 3] * p[0] + Q[row * 3 + 1] * p[1] + Q[row * 3 + 2] * p[2];
          out(c, (t[0] + N - 1) / 2, (t[1] + N - 1) / 2, (t[2] + N - 1) / 2) = in(c, x, y, z);
        }
  return out;
}

ExperimentReport run_invariance_for(const WignerCoefficients& c, const std::vector<int>& Ks, int trials,
                                    std::uint64_t seed) {
  if (trials < 2) throw DomainError("invariance needs at least 2 trials");
  ExperimentReport rep{"invariance", seed, {"K", "std_over_truemax"}, {}, {}, true};
  std::mt19937_64 rng(seed);
  std::vector<WignerCoefficients> copies;
  for (int t = 0; t < trials; ++t) copies.push_back(rotate_so3_function(c, random_rotation(rng)));
  const double top = true_max(c);
  rep.summary.emplace_back("true_max", top);
  for (int K : Ks) {
    std::vector<double> maxima;
    for (const auto& copy : copies) maxima.push_back(sampled_max(copy, K));
    const double sd = sample_std(maxima);
    rep.rows.push_back({static_cast<double>(K), sd == 0.0 ? 0.0 : sd / std::abs(top)});
  }
  return rep;
}

ExperimentReport run_invariance(int L, const std::vector<int>& Ks, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const WignerCoefficients c = random_unit_coefficients(rng, L);
  ExperimentReport rep = run_invariance_for(c, Ks, trials, rng());
  rep.seed = seed;
  return rep;
}

ExperimentReport run_error_law(int L, const std::vector<int>& Ks, int trials, std::uint64_t seed,
                               Pooling pooling) {
  if (trials < 10) throw DomainError("error-law needs at least 10 trials");
  if (pooling != Pooling::hardmax && pooling != Pooling::softmax) {
    throw DomainError("error-law supports hardmax and softmax pooling");
  }
  ExperimentReport rep{pooling == Pooling::hardmax ? "error-law-hardmax" : "error-law-softmax",
                       seed,
                       {"K", "mean_abs_error"},
                       {},
                       {},
                       true};
  std::mt19937_64 rng(seed);
  std::vector<double> err(Ks.size(), 0.0);
  for (int t = 0; t < trials; ++t) {
    const WignerCoefficients c = random_unit_coefficients(rng, L);
    const double ref = pooling == Pooling::hardmax ? true_max(c) : sampled_softmax(c, kDenseGrid);
    for (std::size_t i = 0; i < Ks.size(); ++i) {
      const double v = pooling == Pooling::hardmax ? sampled_max(c, Ks[i]) : sampled_softmax(c, Ks[i]);
      err[i] += std::abs(v - ref);
    }
  }
  std::vector<double> xs;
  for (std::size_t i = 0; i < Ks.size(); ++i) {
    err[i] /= trials;
    xs.push_back(static_cast<double>(Ks[i]));
    rep.rows.push_back({xs.back(), err[i]});
  }
  rep.summary.emplace_back("slope", loglog_slope(xs, err));
  return rep;
}

ExperimentReport run_avg_collapse(std::uint64_t seed, int N, int L, int K, FilterKind kind) {
  if (K < L) throw DomainError("averaging collapse needs K >= L");
  std::mt19937_64 rng(seed);
  const VoxelGrid input = random_voxels(rng, 2, N);
  FilterCoefficients c = random_filter(rng(), L, 2, 2, kind == FilterKind::zero ? 0.0 : 1.0);
  if (kind == FilterKind::radial) c = radial_component(c);

  const OrientationMap m = reconstruct(coefficient_convolution(input, expand_filter(c)), make_so3_grid(K));
  const VoxelGrid avg = pool_average(m);
  const CoefficientMaps radial = coefficient_convolution(input, expand_filter(radial_component(c)));
  double disc = 0.0;
  for (int o = 0; o < avg.channels(); ++o) disc = std::max(disc, max_abs_diff(avg.channel(o), radial.field(o, 0)));

  ExperimentReport rep{"avg-collapse", seed, {"max_abs_discrepancy"}, {{disc}}, {}, disc <= 1e-9};
  return rep;
}

ExperimentReport run_oracle_check(std::uint64_t seed, int N, int L, int K) {
  std::mt19937_64 rng(seed);
  const VoxelGrid input = random_voxels(rng, 2, N);
  const FilterCoefficients c = random_filter(rng(), L, 2, 2, 1.0);
  const SO3Grid grid = make_so3_grid(K);
  const OrientationMap m = reconstruct(coefficient_convolution(input, expand_filter(c), Padding::valid), grid);

  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const FilterCoefficients rotated = rotate_filter(c, grid.rotation(i));
    const VoxelGrid direct = direct_convolution(input, spatial_kernels(rotated), L, c.d_out(), Padding::valid);
    for (int o = 0; o < direct.channels(); ++o) {
      const std::span<const double> d = direct.channel(o);
      for (std::size_t v = 0; v < d.size(); ++v) worst = std::max(worst, std::abs(d[v] - m.slice(o, v)[i]));
    }
  }
  ExperimentReport rep{"oracle-check", seed, {"max_abs_error"}, {{worst}}, {}, worst <= 1e-9};
  return rep;
}

double bound_grid_size(int L, double C, double eps) {
  return 8.0 * kPi * std::pow(static_cast<double>(L), 2.5) * C / (std::sqrt(3.0) * eps);
}

ExperimentReport run_bound_check(int L, double C, double eps, std::uint64_t seed, int functions, int K_limit) {
  if (!(eps > 0.0)) throw DomainError("bound-check needs eps > 0");
  const double K0 = bound_grid_size(L, C, eps);
  std::mt19937_64 rng(seed);
  std::vector<WignerCoefficients> fs;
  std::vector<double> tops;
  for (int f = 0; f < functions; ++f) {
    WignerCoefficients c = random_unit_coefficients(rng, L);
    for (double& v : c.values()) v *= C;
    tops.push_back(true_max(c));
    fs.push_back(std::move(c));
  }
  std::vector<int> per_function(static_cast<std::size_t>(functions), 0);
  int mean_K = 0;
  for (int K = 1; K <= K_limit; ++K) {
    double total = 0.0;
    for (int f = 0; f < functions; ++f) {
      const double e = tops[f] - sampled_max(fs[f], K);
      total += e;
      if (per_function[f] == 0 && e < eps) per_function[f] = K;
    }
    if (mean_K == 0 && total / functions < eps) mean_K = K;
    if (mean_K > 0 && std::all_of(per_function.begin(), per_function.end(), [](int k) { return k > 0; })) break;
  }
  for (int& k : per_function)
    if (k == 0) k = K_limit + 1;
  if (mean_K == 0) mean_K = K_limit + 1;
  const int worst = *std::max_element(per_function.begin(), per_function.end());
  const int within =
      static_cast<int>(std::count_if(per_function.begin(), per_function.end(), [&](int k) { return k <= K0; }));

  ExperimentReport rep{"bound-check",
                       seed,
                       {"L", "C", "eps", "K0", "empirical_K_needed", "worst_function_K", "functions_within_K0"},
                       {{static_cast<double>(L), C, eps, K0, static_cast<double>(mean_K), static_cast<double>(worst),
                         static_cast<double>(within)}},
                       {},
                       mean_K <= K0 && worst <= K0};
  return rep;
}

ExperimentReport run_filter_dump(const FilterCoefficients& c) {
  ExperimentReport rep{"filter-dump", 0, {"out", "in", "shell", "radius", "polar", "azimuthal", "value"}, {}, {}, true};
  for (int l = 0; l < c.L(); ++l) rep.columns.push_back("l" + std::to_string(l));
  const FilterGeometry& geo = c.geometry();
  for (int o = 0; o < c.d_out(); ++o)
    for (int i = 0; i < c.d_in(); ++i)
      for (int s = 1; s < geo.shell_count(); ++s)
        for (int j = 0; j < 18; ++j)
          for (int a = 0; a < 36; ++a) {
            const SphericalAngle ang{kPi * (j + 0.5) / 18.0, 2.0 * kPi * a / 36.0};
            const std::vector<double> parts = angular_profile(c, o, i, s, ang);
            double value = 0.0;
            for (double p : parts) value += p;
            std::vector<double> row = {static_cast<double>(o), static_cast<double>(i), static_cast<double>(s),
                                       geo.shells()[s], ang.polar, ang.azimuthal, value};
            row.insert(row.end(), parts.begin(), parts.end());
            rep.rows.push_back(std::move(row));
          }
  return rep;
}

ExperimentReport run_gradcheck(std::uint64_t seed, int instances, const IlpoLayerConfig& cfg) {
  const double limit = cfg.pooling == Pooling::linear ? 1e-7 : 1e-5;
  ExperimentReport rep{"gradcheck", seed, {"seed", "max_rel_error", "coordinates", "guarded_voxels", "null_coordinates",
                                         "max_rel_error_nonnull"}, {}, {}, true};
  double worst = 0.0;
  double worst_nonnull = 0.0;
  for (int n = 0; n < instances; ++n) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(n);
    const GradcheckReport g = gradcheck(s, cfg);
    worst = std::max(worst, g.max_rel_error);
    worst_nonnull = std::max(worst_nonnull, g.max_rel_error_nonnull);
    rep.rows.push_back({static_cast<double>(s), g.max_rel_error, static_cast<double>(g.coordinates),
                        static_cast<double>(g.guarded_voxels), static_cast<double>(g.null_coordinates),
                        g.max_rel_error_nonnull});
  }
  rep.summary.emplace_back("max_rel_error", worst);
  rep.summary.emplace_back("max_rel_error_nonnull", worst_nonnull);
  rep.passed = worst <= limit;
  return rep;
}

ExperimentReport run_layer_invariance(std::uint64_t seed, int instances, int N, const IlpoLayerConfig& cfg,
                                      double tolerance_factor) {
  ExperimentReport rep{"layer-invariance", seed, {"instance", "rotation", "max_abs_diff", "h_max", "tolerance"},
                       {}, {}, true};
  std::mt19937_64 rng(seed);
  const auto rotations = cube_rotations();
  double worst_ratio = 0.0;
  for (int n = 0; n < instances; ++n) {
    const VoxelGrid input = random_voxels(rng, 2, N);
    const FilterCoefficients c = random_filter(rng(), cfg.L, 2, 2, 1.0);
    const OrientationMap m =
        reconstruct(coefficient_convolution(input, expand_filter(c), cfg.padding), make_so3_grid(cfg.grid_size()));
    double h_max = 0.0;
    for (double v : m.values()) h_max = std::max(h_max, std::abs(v));
    const VoxelGrid out = ilpo_forward(input, c, cfg).output;
    for (std::size_t q = 0; q < rotations.size(); ++q) {
      const VoxelGrid lhs = ilpo_forward(rotate_voxels(input, rotations[q]), c, cfg).output;
      const VoxelGrid rhs = rotate_voxels(out, rotations[q]);
      const double diff = max_abs_diff(lhs.values(), rhs.values());
      const double tol = tolerance_factor * h_max;
      rep.rows.push_back({static_cast<double>(n), static_cast<double>(q), diff, h_max, tol});
      worst_ratio = std::max(worst_ratio, diff / h_max);
      if (diff > tol) rep.passed = false;
    }
  }
  rep.summary.emplace_back("max_diff_over_hmax", worst_ratio);
  return rep;
}

StagedForward run_conv(const VoxelGrid& input, const FilterCoefficients& c, const IlpoLayerConfig& cfg) {
  using clock = std::chrono::steady_clock;
  cfg.validate(c.d_out());
  if (c.L() != cfg.L) {
    throw ShapeError("filter has L=" + std::to_string(c.L()) + ", config has L=" + std::to_string(cfg.L));
  }
  StagedForward res;
  auto t0 = clock::now();
  const ExpandedFilter expanded = expand_filter(c);
  auto t1 = clock::now();
  const CoefficientMaps maps = coefficient_convolution(input, expanded, cfg.padding);
  auto t2 = clock::now();
  const PoolingRecord rec = reconstruct_and_pool(maps, make_so3_grid(cfg.grid_size()),
                                                 {cfg.pooling, cfg.eps, cfg.linear_weights}, cfg.block_voxels);
  auto t3 = clock::now();
  res.output = rec.output;
  if (!cfg.bias.empty()) {
    for (int o = 0; o < res.output.channels(); ++o)
      for (double& v : res.output.channel(o)) v += cfg.bias[static_cast<std::size_t>(o)];
  }
  auto t4 = clock::now();
  const auto secs = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
  res.stage_seconds = {{"expand", secs(t0, t1)},
                       {"convolution", secs(t1, t2)},
                       {"reconstruct_pool", secs(t2, t3)},
                       {"bias", secs(t3, t4)}};
  return res;
}

}  // namespace ilpo
