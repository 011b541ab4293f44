#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ilpo/conv3d.hpp"
#include "ilpo/filter.hpp"
#include "ilpo/layer.hpp"
#include "ilpo/orientation.hpp"
#include "ilpo/so3.hpp"

namespace ilpo {

/// Tabular result of one experiment. `passed` is false when the experiment's
/// own assertion fails; `summary` carries scalar results such as fitted slopes.
struct ExperimentReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, double>> summary;
  bool passed = true;

  /// Header row plus one line per record, numbers at 17 significant digits.
  std::string to_csv() const;
  /// Looks up a summary entry, then a column of a single-row report; throws
  /// std::out_of_range when neither exists.
  double metric(const std::string& key) const;
};

/// Uniform on SO(3): alpha, gamma uniform, cos(beta) uniform on [-1, 1].
EulerZYZ random_rotation(std::mt19937_64& rng);

/// Standard-normal Wigner coefficients of degree < L rescaled to unit so3_norm.
WignerCoefficients random_unit_coefficients(std::mt19937_64& rng, int L);

VoxelGrid random_voxels(std::mt19937_64& rng, int channels, int N);

/// Maximum of the function over make_so3_grid(K).
double sampled_max(const WignerCoefficients& c, int K);

/// Softmax pooling of the function sampled on make_so3_grid(K).
double sampled_softmax(const WignerCoefficients& c, int K);

/// Maximum over a K = 64 grid, refined by pattern search from the best few
/// grid points.
double true_max(const WignerCoefficients& c);

/// Least-squares slope of log(y) against log(x), skipping non-positive y.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// The 24 signed permutation matrices with determinant +1, row-major.
std::vector<std::array<int, 9>> cube_rotations();

/// Rotates a cubic grid about its center: out(Q (p - c) + c) = in(p).
VoxelGrid rotate_voxels(const VoxelGrid& in, const std::array<int, 9>& Q);

/// Columns (K, std_over_truemax): spread of the sampled maximum over randomly
/// rotated copies of one unit-norm function, relative to its true maximum.
ExperimentReport run_invariance(int L, const std::vector<int>& Ks, int trials, std::uint64_t seed);

/// Same measurement for a given function.
ExperimentReport run_invariance_for(const WignerCoefficients& c, const std::vector<int>& Ks, int trials,
                                    std::uint64_t seed);

/// Columns (K, mean_abs_error) against a dense reference, plus summary "slope".
ExperimentReport run_error_law(int L, const std::vector<int>& Ks, int trials, std::uint64_t seed,
                               Pooling pooling);

enum class FilterKind { random, zero, radial };

/// Column max_abs_discrepancy between the quadrature average of the orientation
/// response and the convolution with the radial part of the filter.
ExperimentReport run_avg_collapse(std::uint64_t seed, int N, int L, int K, FilterKind kind = FilterKind::random);

/// Column max_abs_error between the reconstructed response and a direct
/// convolution with the analytically rotated filter, over all grid rotations.
ExperimentReport run_oracle_check(std::uint64_t seed, int N, int L, int K);

/// Columns (K0, empirical_K_needed, worst_function_K): the closed-form grid
/// size against the smallest K at which the mean sampled-max error over
/// `functions` random functions of norm C drops below eps. `passed` requires
/// both the mean-based K and every per-function K to be at most K0.
ExperimentReport run_bound_check(int L, double C, double eps, std::uint64_t seed, int functions = 50,
                                 int K_limit = 256);

/// Closed-form sufficient grid size 8 pi L^{5/2} C / (sqrt(3) eps).
double bound_grid_size(int L, double C, double eps);

/// One row per (out, in, shell > 0, azimuth, polar) on a 36 x 18 grid with the
/// filter value and its per-degree parts.
ExperimentReport run_filter_dump(const FilterCoefficients& c);

/// One row per seed: (seed, max_rel_error, coordinates, guarded_voxels,
/// null_coordinates, max_rel_error_nonnull). `passed` uses max_rel_error.
ExperimentReport run_gradcheck(std::uint64_t seed, int instances, const IlpoLayerConfig& cfg);

/// Per (instance, cube rotation): max |out(rot f) - rot(out f)|, the largest
/// |h| of the unrotated instance and the allowed tolerance factor * |h|_max.
ExperimentReport run_layer_invariance(std::uint64_t seed, int instances, int N, const IlpoLayerConfig& cfg,
                                      double tolerance_factor);

/// Layer forward with per-stage wall times (seconds) in `summary`.
struct StagedForward {
  VoxelGrid output;
  std::vector<std::pair<std::string, double>> stage_seconds;
};
StagedForward run_conv(const VoxelGrid& input, const FilterCoefficients& c, const IlpoLayerConfig& cfg);

}  // namespace ilpo
