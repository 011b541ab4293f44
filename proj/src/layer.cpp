#include "ilpo/layer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ilpo/error.hpp"

namespace ilpo {

int default_grid_size(Pooling pooling) { return pooling == Pooling::hardmax ? 7 : 4; }

void IlpoLayerConfig::validate(int d_out) const {
  if (L < 1 || L % 2 == 0) throw DomainError("L must be odd and positive, got " + std::to_string(L));
  if (K < 0) throw DomainError("K must be positive, got " + std::to_string(K));
  if (!bias.empty() && static_cast<int>(bias.size()) != d_out) {
    throw ShapeError("bias has " + std::to_string(bias.size()) + " entries for " + std::to_string(d_out) +
                     " output channels");
  }
  if (pooling == Pooling::softmax && !(eps > 0.0)) throw DomainError("softmax eps must be positive");
  if (pooling == Pooling::linear) {
    const std::size_t k = static_cast<std::size_t>(grid_size());
    if (linear_weights.size() != k * k * k) throw ShapeError("linear pooling weight count must be K^3");
  }
  if (block_voxels == 0) throw DomainError("block size must be positive");
}

struct ForwardTape::State {
  VoxelGrid input;
  ExpandedFilter expanded;
  CoefficientMaps maps;
  IlpoLayerConfig cfg;
  PoolingRecord record;
  // softmax: 1 where h > 0, per (out, voxel, grid sample)
  std::vector<std::uint8_t> relu_mask;
};

ForwardTape::ForwardTape(std::unique_ptr<State> state) : state_(std::move(state)) {}
ForwardTape::ForwardTape(ForwardTape&& other) noexcept = default;
ForwardTape& ForwardTape::operator=(ForwardTape&& other) noexcept = default;
ForwardTape::~ForwardTape() = default;

ForwardResult ilpo_forward(const VoxelGrid& input, const FilterCoefficients& c, const IlpoLayerConfig& cfg) {
  cfg.validate(c.d_out());
  if (c.L() != cfg.L) {
    throw ShapeError("filter has L=" + std::to_string(c.L()) + ", config has L=" + std::to_string(cfg.L));
  }
  ExpandedFilter expanded = expand_filter(c);
  CoefficientMaps maps = coefficient_convolution(input, expanded, cfg.padding);
  const SO3Grid grid = make_so3_grid(cfg.grid_size());
  PoolingOptions opts{cfg.pooling, cfg.eps, cfg.linear_weights};
  PoolingRecord record = reconstruct_and_pool(maps, grid, opts, cfg.block_voxels);

  VoxelGrid output = record.output;
  if (!cfg.bias.empty()) {
    for (int o = 0; o < output.channels(); ++o)
      for (double& v : output.channel(o)) v += cfg.bias[static_cast<std::size_t>(o)];
  }

  std::vector<std::uint8_t> mask;
  if (cfg.pooling == Pooling::softmax) {
    const auto table = shared_wigner_table(grid.K(), cfg.L);
    const std::size_t nv = maps.voxels();
    const std::size_t ns = grid.size();
    mask.assign(static_cast<std::size_t>(maps.d_out()) * nv * ns, 0);
    const long long total = static_cast<long long>(maps.d_out()) * static_cast<long long>(nv);
#pragma omp parallel
    {
      std::vector<double> coeffs(maps.kernels());
      std::vector<double> h(ns);
#pragma omp for schedule(static)
      for (long long t = 0; t < total; ++t) {
        const int o = static_cast<int>(t / static_cast<long long>(nv));
        const std::size_t v = static_cast<std::size_t>(t % static_cast<long long>(nv));
        for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] = maps.field(o, k)[v];
        table->synthesize(coeffs, h);
        std::uint8_t* m = mask.data() + static_cast<std::size_t>(t) * ns;
        for (std::size_t i = 0; i < ns; ++i) m[i] = h[i] > 0.0 ? 1 : 0;
      }
    }
  }

  auto state = std::make_unique<ForwardTape::State>(ForwardTape::State{
      input, std::move(expanded), std::move(maps), cfg, std::move(record), std::move(mask)});
  return ForwardResult{std::move(output), ForwardTape(std::move(state))};
}

LayerGradients ilpo_backward(ForwardTape&& tape, const VoxelGrid& d_output) {
  if (!tape.valid()) throw TapeError("forward tape was already consumed");
  const std::unique_ptr<ForwardTape::State> st = std::move(tape.state_);
  const VoxelGrid& out = st->record.output;
  if (!d_output.same_shape(out)) {
    throw TapeError("d_output shape " + d_output.shape_string() + " does not match forward output " +
                    out.shape_string());
  }
  const IlpoLayerConfig& cfg = st->cfg;
  const int L = cfg.L;
  const SO3Grid grid = make_so3_grid(cfg.grid_size());
  const auto table = shared_wigner_table(grid.K(), L);
  const CoefficientMaps& maps = st->maps;
  const std::size_t nv = maps.voxels();
  const std::size_t nk = maps.kernels();
  const std::size_t ns = grid.size();
  const int K = grid.K();
  CoefficientMaps d_maps(maps.d_out(), L, maps.X(), maps.Y(), maps.Z());
  const long long total = static_cast<long long>(maps.d_out()) * static_cast<long long>(nv);

#pragma omp parallel
  {
    std::vector<double> coeffs(nk);
    std::vector<double> h(ns);
    std::vector<double> dh(ns);
#pragma omp for schedule(static)
    for (long long t = 0; t < total; ++t) {
      const int o = static_cast<int>(t / static_cast<long long>(nv));
      const std::size_t v = static_cast<std::size_t>(t % static_cast<long long>(nv));
      const std::size_t at = static_cast<std::size_t>(t);
      const double g = d_output.values()[at];
      std::fill(coeffs.begin(), coeffs.end(), 0.0);
      if (g != 0.0) {
        switch (cfg.pooling) {
          case Pooling::hardmax: {
            const std::uint32_t arg = st->record.argmax[at];
            const int q = static_cast<int>(arg / static_cast<std::uint32_t>(K * K));
            const int r = static_cast<int>((arg / static_cast<std::uint32_t>(K)) % static_cast<std::uint32_t>(K));
            const int s = static_cast<int>(arg % static_cast<std::uint32_t>(K));
            for (int l = 0; l < L; ++l)
              for (int m1 = -l; m1 <= l; ++m1)
                for (int m2 = -l; m2 <= l; ++m2)
                  coeffs[WignerCoefficients::flat_index(l, m1, m2)] = g * table->element(l, m1, m2, q, r, s);
            break;
          }
          case Pooling::softmax: {
            const double den = st->record.denominator[at];
            if (den < cfg.eps) break;
            const double pooled = st->record.output.values()[at];
            std::vector<double> c(nk);
            for (std::size_t k = 0; k < nk; ++k) c[k] = maps.field(o, k)[v];
            table->synthesize(c, h);
            const std::uint8_t* mask = st->relu_mask.data() + at * ns;
            std::size_t i = 0;
            for (int q = 0; q < K; ++q)
              for (int r = 0; r < K; ++r)
                for (int s = 0; s < K; ++s, ++i)
                  dh[i] = mask[i] ? g * grid.weight(r) * (2.0 * h[i] - pooled) / den : 0.0;
            table->analyze(dh, coeffs);
            break;
          }
          case Pooling::linear:
            for (std::size_t i = 0; i < ns; ++i) dh[i] = g * cfg.linear_weights[i];
            table->analyze(dh, coeffs);
            break;
          case Pooling::average: {
            std::size_t i = 0;
            for (int q = 0; q < K; ++q)
              for (int r = 0; r < K; ++r)
                for (int s = 0; s < K; ++s, ++i) dh[i] = g * grid.weight(r) / (8.0 * kPi * kPi);
            table->analyze(dh, coeffs);
            break;
          }
        }
      }
      double* base = d_maps.values().data() + static_cast<std::size_t>(o) * nk * nv + v;
      for (std::size_t k = 0; k < nk; ++k) base[k * nv] = coeffs[k];
    }
  }

  const VoxelGrid& in = st->input;
  LayerGradients grads{expand_filter_adjoint(conv_adjoint_filter(in, d_maps, cfg.padding)),
                       conv_adjoint_input(d_maps, st->expanded, cfg.padding, in.X(), in.Y(), in.Z()),
                       std::vector<double>(static_cast<std::size_t>(out.channels()), 0.0)};
  for (int o = 0; o < out.channels(); ++o)
    for (double v : d_output.channel(o)) grads.d_bias[static_cast<std::size_t>(o)] += v;
  return grads;
}

namespace {

constexpr double kNullDerivative = 1e-10;

// Central difference of sum(upstream * output), differencing per output
// element before the reduction so unaffected voxels cancel exactly.
double central_difference(const VoxelGrid& in_plus, const FilterCoefficients& c_plus, const VoxelGrid& in_minus,
                          const FilterCoefficients& c_minus, const IlpoLayerConfig& cfg, const VoxelGrid& upstream,
                          double step) {
  const VoxelGrid plus = ilpo_forward(in_plus, c_plus, cfg).output;
  const VoxelGrid minus = ilpo_forward(in_minus, c_minus, cfg).output;
  double s = 0.0;
  for (std::size_t i = 0; i < upstream.values().size(); ++i) {
    s += upstream.values()[i] * (plus.values()[i] - minus.values()[i]);
  }
  return s / (2.0 * step);
}

double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

void note_null(GradcheckReport& report, double analytic, double numeric, double e) {
  if (std::abs(analytic) <= kNullDerivative && std::abs(numeric) <= kNullDerivative) {
    ++report.null_coordinates;
  } else {
    report.max_rel_error_nonnull = std::max(report.max_rel_error_nonnull, e);
  }
}

}  // namespace

GradcheckReport gradcheck(std::uint64_t seed, const IlpoLayerConfig& cfg_in, const GradcheckOptions& opts) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  IlpoLayerConfig cfg = cfg_in;
  const int K = cfg.grid_size();
  const std::size_t ns = static_cast<std::size_t>(K) * K * K;
  if (cfg.pooling == Pooling::linear && cfg.linear_weights.empty()) {
    cfg.linear_weights.resize(ns);
    for (double& w : cfg.linear_weights) w = normal(rng);
  }

  VoxelGrid input(opts.d_in, opts.N, opts.N, opts.N);
  for (double& v : input.values()) v = normal(rng);
  FilterCoefficients c = random_filter(rng(), cfg.L, opts.d_in, opts.d_out, 0.5);
  VoxelGrid upstream(opts.d_out, output_extent(opts.N, cfg.L, cfg.padding),
                     output_extent(opts.N, cfg.L, cfg.padding), output_extent(opts.N, cfg.L, cfg.padding));
  for (double& v : upstream.values()) v = normal(rng);

  GradcheckReport report;
  if (cfg.pooling == Pooling::hardmax || cfg.pooling == Pooling::softmax) {
    const OrientationMap m =
        reconstruct(coefficient_convolution(input, expand_filter(c), cfg.padding), make_so3_grid(K));
    for (int o = 0; o < m.d_out(); ++o) {
      for (std::size_t v = 0; v < m.voxels(); ++v) {
        const std::span<const double> h = m.slice(o, v);
        bool near_kink = false;
        if (cfg.pooling == Pooling::softmax) {
          for (double x : h) near_kink = near_kink || std::abs(x) < opts.guard;
        } else {
          std::vector<double> sorted(h.begin(), h.end());
          std::partial_sort(sorted.begin(), sorted.begin() + std::min<std::ptrdiff_t>(2, sorted.size()),
                            sorted.end(), std::greater<>());
          near_kink = sorted.size() > 1 && sorted[0] - sorted[1] < opts.guard;
        }
        if (near_kink) {
          upstream.channel(o)[v] = 0.0;
          ++report.guarded_voxels;
        }
      }
    }
  }

  ForwardResult fr = ilpo_forward(input, c, cfg);
  const LayerGradients g = ilpo_backward(std::move(fr.tape), upstream);
  const double step = opts.step;

  std::vector<std::size_t> free;
  for (int o = 0; o < c.d_out(); ++o)
    for (int i = 0; i < c.d_in(); ++i)
      for (int l = 0; l < c.L(); ++l)
        for (int m = -l; m <= l; ++m)
          for (int s = 0; s < c.geometry().shell_count(); ++s)
            if (!c.masked(l, s)) free.push_back(c.index(o, i, l, m, s));

  for (int n = 0; n < opts.coefficient_samples; ++n) {
    const std::size_t idx = free[rng() % free.size()];
    FilterCoefficients plus = c, minus = c;
    plus.values()[idx] += step;
    minus.values()[idx] -= step;
    const double numeric = central_difference(input, plus, input, minus, cfg, upstream, step);
    const double e = rel_error(g.d_coefficients.values()[idx], numeric);
    report.max_rel_error_coefficients = std::max(report.max_rel_error_coefficients, e);
    note_null(report, g.d_coefficients.values()[idx], numeric, e);
    ++report.coordinates;
  }
  for (int n = 0; n < opts.input_samples; ++n) {
    const std::size_t idx = rng() % input.values().size();
    VoxelGrid plus = input, minus = input;
    plus.values()[idx] += step;
    minus.values()[idx] -= step;
    const double numeric = central_difference(plus, c, minus, c, cfg, upstream, step);
    const double e = rel_error(g.d_input.values()[idx], numeric);
    report.max_rel_error_input = std::max(report.max_rel_error_input, e);
    note_null(report, g.d_input.values()[idx], numeric, e);
    ++report.coordinates;
  }
  report.max_rel_error = std::max(report.max_rel_error_coefficients, report.max_rel_error_input);
  return report;
}

}  // namespace ilpo
