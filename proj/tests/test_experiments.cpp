#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "ilpo/experiments.hpp"
#include "ilpo/io.hpp"

using namespace ilpo;

TEST_CASE("reports render as CSV with a header row") {
  ExperimentReport r;
  r.columns = {"a", "b"};
  r.rows = {{1.0, 0.1}, {2.0, -3.5}};
  r.summary = {{"slope", -2.0}};
  CHECK(r.to_csv() == "a,b\n1,0.10000000000000001\n2,-3.5\n");
  CHECK(r.metric("slope") == -2.0);
  CHECK_THROWS_AS(r.metric("missing"), std::out_of_range);
}

TEST_CASE("experiments are deterministic under a fixed seed") {
  CHECK(run_invariance(3, {3, 5}, 10, 4).to_csv() == run_invariance(3, {3, 5}, 10, 4).to_csv());
  CHECK(run_error_law(3, {4, 6}, 10, 2, Pooling::softmax).to_csv() ==
        run_error_law(3, {4, 6}, 10, 2, Pooling::softmax).to_csv());
  CHECK(run_invariance(3, {3}, 10, 4).to_csv() != run_invariance(3, {3}, 10, 5).to_csv());
}

TEST_CASE("cube rotations are the 24 proper signed permutations") {
  const auto rots = cube_rotations();
  CHECK(rots.size() == 24);
  std::set<std::array<int, 9>> distinct(rots.begin(), rots.end());
  CHECK(distinct.size() == 24);
  for (const auto& q : rots) {
    const int det = q[0] * (q[4] * q[8] - q[5] * q[7]) - q[1] * (q[3] * q[8] - q[5] * q[6]) +
                    q[2] * (q[3] * q[7] - q[4] * q[6]);
    CHECK(det == 1);
  }
}

TEST_CASE("rotate_voxels moves voxels about the center") {
  std::mt19937_64 rng(1);
  const VoxelGrid f = random_voxels(rng, 1, 5);
  CHECK(identical(rotate_voxels(f, {1, 0, 0, 0, 1, 0, 0, 0, 1}), f));
  const std::array<int, 9> quarter = {0, -1, 0, 1, 0, 0, 0, 0, 1};
  // (x, y) - c -> (-(y - c), x - c): voxel (4, 0, z) lands at (4, 4, z).
  CHECK(rotate_voxels(f, quarter)(0, 4, 4, 2) == f(0, 4, 0, 2));
  VoxelGrid g = f;
  for (int i = 0; i < 4; ++i) g = rotate_voxels(g, quarter);
  CHECK(identical(g, f));
}

TEST_CASE("loglog_slope recovers power laws") {
  CHECK(std::abs(loglog_slope({2, 4, 8, 16}, {3.0 / 8, 3.0 / 64, 3.0 / 512, 3.0 / 4096}) + 3.0) < 1e-12);
  CHECK(std::abs(loglog_slope({1, 2, 3}, {5, -1, 5}) - 0.0) < 1e-12);
}

TEST_CASE("true maximum dominates every sampled maximum") {
  std::mt19937_64 rng(2);
  const WignerCoefficients c = random_unit_coefficients(rng, 3);
  CHECK(std::abs(so3_norm(c) - 1.0) < 1e-12);
  const double t = true_max(c);
  for (int K = 1; K <= 20; ++K) CHECK(sampled_max(c, K) <= t + 1e-12);
  CHECK(t - sampled_max(c, 20) < 0.05 * std::abs(t));
}

TEST_CASE("bound check asserts the inequality and handles a huge tolerance") {
  CHECK(std::abs(bound_grid_size(3, 1.0, 0.1) - 8 * kPi * std::pow(3.0, 2.5) / (std::sqrt(3.0) * 0.1)) < 1e-9);
  const ExperimentReport loose = run_bound_check(2, 1.0, 1e9, 1, 5);
  CHECK(loose.metric("empirical_K_needed") == 1.0);
  CHECK(loose.metric("K0") < 1.0);
  CHECK(run_bound_check(2, 1.0, 0.1, 1, 10).passed);
}

TEST_CASE("filter dump examples") {
  const ExperimentReport zero = run_filter_dump(FilterCoefficients(3, 1, 1));
  CHECK(zero.rows.size() == 3 * 36 * 18);
  const std::size_t value_col = 6;
  REQUIRE(zero.columns[value_col] == "value");
  for (const auto& row : zero.rows) CHECK(row[value_col] == 0.0);

  const FilterCoefficients radial = radial_component(random_filter(1, 3, 1, 1, 1.0));
  const ExperimentReport flat = run_filter_dump(radial);
  for (const auto& row : flat.rows) {
    const int shell = static_cast<int>(row[2]);
    CHECK(std::abs(row[value_col] - radial(0, 0, 0, 0, shell) / (2.0 * std::sqrt(kPi))) < 1e-15);
  }

  const FilterCoefficients c = random_filter(2, 3, 1, 2, 1.0);
  const ExperimentReport dump = run_filter_dump(c);
  for (std::size_t i = 0; i < dump.rows.size(); i += dump.rows.size() / 10) {
    const auto& row = dump.rows[i];
    const int out = static_cast<int>(row[0]), shell = static_cast<int>(row[2]);
    const SphericalAngle a = SphericalAngle::make(row[4], row[5]);
    double expected = 0.0;
    for (int l = 0; l < 3; ++l)
      for (int m = -l; m <= l; ++m) expected += c(out, 0, l, m, shell) * real_spherical_harmonic(l, m, a);
    CHECK(std::abs(row[value_col] - expected) < 1e-13);
  }
}

TEST_CASE("oracle check on a small grid") {
  const ExperimentReport r = run_oracle_check(1, 5, 3, 3);
  CHECK(r.passed);
  CHECK(r.metric("max_abs_error") <= 1e-9);
}

TEST_CASE("run_conv equals the library forward bitwise") {
  std::mt19937_64 rng(3);
  const VoxelGrid f = random_voxels(rng, 1, 6);
  const FilterCoefficients c = random_filter(4, 3, 1, 2, 1.0);
  IlpoLayerConfig cfg;
  const StagedForward staged = run_conv(f, c, cfg);
  CHECK(identical(staged.output, ilpo_forward(f, c, cfg).output));
  CHECK(staged.stage_seconds.size() >= 3);
  const VoxelGrid zero = run_conv(f, FilterCoefficients(3, 1, 2), cfg).output;
  for (double v : zero.values()) CHECK(v == 0.0);
}
