#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <random>

#include "ilpo/error.hpp"
#include "ilpo/experiments.hpp"
#include "ilpo/layer.hpp"
#include "support.hpp"

using namespace ilpo;
using testing_support::dot;

TEST_CASE("config defaults and validation") {
  CHECK(default_grid_size(Pooling::softmax) == 4);
  CHECK(default_grid_size(Pooling::hardmax) == 7);
  IlpoLayerConfig cfg;
  CHECK(cfg.grid_size() == 4);
  cfg.pooling = Pooling::hardmax;
  CHECK(cfg.grid_size() == 7);
  cfg.K = 5;
  CHECK(cfg.grid_size() == 5);
  CHECK_NOTHROW(cfg.validate(2));
  cfg.L = 4;
  CHECK_THROWS_AS(cfg.validate(2), DomainError);
  cfg.L = 3;
  cfg.bias = {1.0};
  CHECK_THROWS_AS(cfg.validate(2), ShapeError);
  cfg.bias.clear();
  cfg.pooling = Pooling::linear;
  CHECK_THROWS_AS(cfg.validate(2), ShapeError);
}

TEST_CASE("forward is the bitwise composition of the stages") {
  std::mt19937_64 rng(1);
  const VoxelGrid f = random_voxels(rng, 2, 6);
  const FilterCoefficients c = random_filter(2, 3, 2, 3, 0.5);
  for (Pooling p : {Pooling::softmax, Pooling::hardmax}) {
    for (Padding pad : {Padding::same, Padding::valid}) {
      IlpoLayerConfig cfg;
      cfg.pooling = p;
      cfg.padding = pad;
      cfg.bias = {0.1, -0.2, 0.3};
      cfg.block_voxels = 10;
      const ForwardResult res = ilpo_forward(f, c, cfg);
      const SO3Grid grid = make_so3_grid(cfg.grid_size());
      VoxelGrid expected = pool(reconstruct(coefficient_convolution(f, expand_filter(c), pad), grid),
                                PoolingOptions{p, cfg.eps, {}})
                               .output;
      for (int o = 0; o < 3; ++o)
        for (double& v : expected.channel(o)) v += cfg.bias[o];
      CHECK(identical(res.output, expected));
    }
  }
}

TEST_CASE("zero upstream gradient gives zero gradients") {
  std::mt19937_64 rng(2);
  const VoxelGrid f = random_voxels(rng, 1, 5);
  IlpoLayerConfig cfg;
  cfg.bias = {0.5};
  ForwardResult res = ilpo_forward(f, random_filter(3, 3, 1, 1, 1.0), cfg);
  const LayerGradients g = ilpo_backward(std::move(res.tape), VoxelGrid(1, 5, 5, 5));
  for (double v : g.d_coefficients.values()) CHECK(v == 0.0);
  for (double v : g.d_input.values()) CHECK(v == 0.0);
  REQUIRE(g.d_bias.size() == 1);
  CHECK(g.d_bias[0] == 0.0);
}

TEST_CASE("tapes are single-use and shape-checked") {
  std::mt19937_64 rng(3);
  const VoxelGrid f = random_voxels(rng, 1, 5);
  ForwardResult res = ilpo_forward(f, random_filter(4, 3, 1, 1, 1.0), IlpoLayerConfig{});
  CHECK(res.tape.valid());
  CHECK_THROWS_AS(ilpo_backward(std::move(res.tape), VoxelGrid(1, 4, 5, 5)), TapeError);
  ForwardResult again = ilpo_forward(f, random_filter(4, 3, 1, 1, 1.0), IlpoLayerConfig{});
  ilpo_backward(std::move(again.tape), VoxelGrid(1, 5, 5, 5));
  CHECK_FALSE(again.tape.valid());
  CHECK_THROWS_AS(ilpo_backward(std::move(again.tape), VoxelGrid(1, 5, 5, 5)), TapeError);
}

TEST_CASE("hardmax with a radial filter routes the gradient through one input patch") {
  std::mt19937_64 rng(4);
  const int n = 5;
  const VoxelGrid f = random_voxels(rng, 2, n);
  const FilterCoefficients c = radial_component(random_filter(5, 3, 2, 1, 1.0));
  IlpoLayerConfig cfg;
  cfg.pooling = Pooling::hardmax;
  ForwardResult res = ilpo_forward(f, c, cfg);
  VoxelGrid up(1, n, n, n);
  const int px = 2, py = 1, pz = 3;
  up(0, px, py, pz) = 1.0;
  const LayerGradients g = ilpo_backward(std::move(res.tape), up);

  const FilterGeometry& geo = c.geometry();
  const double y00 = 1.0 / (2.0 * std::sqrt(kPi));
  std::vector<double> expected(static_cast<std::size_t>(2 * geo.shell_count()), 0.0);
  VoxelGrid expected_input(2, n, n, n);
  for (int in = 0; in < 2; ++in)
    for (int v = 0; v < geo.volume(); ++v) {
      const auto o = geo.offset(v);
      const int x = px + o[0], y = py + o[1], z = pz + o[2];
      if (x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n) continue;
      expected[in * geo.shell_count() + geo.shell_of(v)] += f(in, x, y, z) * y00;
      expected_input(in, x, y, z) += c(0, in, 0, 0, geo.shell_of(v)) * y00;
    }
  for (int in = 0; in < 2; ++in)
    for (int s = 0; s < geo.shell_count(); ++s) {
      CHECK(std::abs(g.d_coefficients(0, in, 0, 0, s) - expected[in * geo.shell_count() + s]) < 1e-12);
    }
  CHECK(testing_support::max_abs_diff(g.d_input.values(), expected_input.values()) < 1e-12);
}

TEST_CASE("hardmax gradient is an ascent direction") {
  std::mt19937_64 rng(5);
  const VoxelGrid f = random_voxels(rng, 1, 5);
  FilterCoefficients c = random_filter(6, 3, 1, 1, 1.0);
  IlpoLayerConfig cfg;
  cfg.pooling = Pooling::hardmax;
  VoxelGrid up(1, 5, 5, 5);
  testing_support::fill_normal(up.values(), rng);
  ForwardResult res = ilpo_forward(f, c, cfg);
  const double base = dot(res.output.values(), up.values());
  const LayerGradients g = ilpo_backward(std::move(res.tape), up);
  const double t = 1e-6;
  for (std::size_t i = 0; i < c.values().size(); ++i) c.values()[i] += t * g.d_coefficients.values()[i];
  const double moved = dot(ilpo_forward(f, c, cfg).output.values(), up.values());
  const double predicted = t * dot(g.d_coefficients.values(), g.d_coefficients.values());
  CHECK(moved - base > 0.0);
  CHECK(std::abs((moved - base) - predicted) < 1e-3 * predicted);
}

TEST_CASE("bias gradient sums the upstream gradient") {
  std::mt19937_64 rng(6);
  const VoxelGrid f = random_voxels(rng, 1, 4);
  IlpoLayerConfig cfg;
  cfg.bias = {0.0, 1.0};
  ForwardResult res = ilpo_forward(f, random_filter(7, 3, 1, 2, 1.0), cfg);
  VoxelGrid up(2, 4, 4, 4);
  testing_support::fill_normal(up.values(), rng);
  const LayerGradients g = ilpo_backward(std::move(res.tape), up);
  for (int o = 0; o < 2; ++o) {
    double s = 0.0;
    for (double v : up.channel(o)) s += v;
    CHECK(std::abs(g.d_bias[o] - s) < 1e-12);
  }
}

TEST_CASE("gradcheck on small instances") {
  IlpoLayerConfig cfg;
  cfg.pooling = Pooling::hardmax;
  CHECK(gradcheck(1, cfg).max_rel_error <= 1e-5);
  cfg.pooling = Pooling::softmax;
  const GradcheckReport soft = gradcheck(1, cfg);
  CHECK(soft.max_rel_error_nonnull <= 1e-5);
  CHECK(soft.coordinates >= 50);
}

TEST_CASE("forward and backward do not depend on the thread count") {
  std::mt19937_64 rng(7);
  const VoxelGrid f = random_voxels(rng, 2, 7);
  const FilterCoefficients c = random_filter(8, 3, 2, 2, 0.5);
  VoxelGrid up(2, 7, 7, 7);
  testing_support::fill_normal(up.values(), rng);
  const int saved = omp_get_max_threads();
  std::vector<LayerGradients> grads;
  std::vector<VoxelGrid> outs;
  for (int threads : {1, 4}) {
    omp_set_num_threads(threads);
    IlpoLayerConfig cfg;
    ForwardResult res = ilpo_forward(f, c, cfg);
    outs.push_back(res.output);
    grads.push_back(ilpo_backward(std::move(res.tape), up));
  }
  omp_set_num_threads(saved);
  CHECK(identical(outs[0], outs[1]));
  CHECK(grads[0].d_coefficients.values() == grads[1].d_coefficients.values());
  CHECK(identical(grads[0].d_input, grads[1].d_input));
}

TEST_CASE("quarter turns about z are exact grid symmetries at K = 4") {
  std::mt19937_64 rng(9);
  const VoxelGrid f = random_voxels(rng, 1, 7);
  const FilterCoefficients c = random_filter(10, 3, 1, 1, 1.0);
  const std::array<int, 9> quarter = {0, -1, 0, 1, 0, 0, 0, 0, 1};
  IlpoLayerConfig cfg;
  cfg.K = 4;
  for (Pooling p : {Pooling::softmax, Pooling::hardmax}) {
    cfg.pooling = p;
    const VoxelGrid a = ilpo_forward(rotate_voxels(f, quarter), c, cfg).output;
    const VoxelGrid b = rotate_voxels(ilpo_forward(f, c, cfg).output, quarter);
    CHECK(testing_support::max_abs_diff(a.values(), b.values()) < 1e-12);
  }
}
