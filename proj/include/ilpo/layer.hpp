#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "ilpo/conv3d.hpp"
#include "ilpo/filter.hpp"
#include "ilpo/orientation.hpp"

namespace ilpo {

/// Grid size used when a config leaves K unset: 4 for softmax, 7 for hardmax.
int default_grid_size(Pooling pooling);

struct IlpoLayerConfig {
  int L = 3;
  /// 0 selects default_grid_size(pooling).
  int K = 0;
  Pooling pooling = Pooling::softmax;
  Padding padding = Padding::same;
  /// Empty, or one value per output channel, added after pooling.
  std::vector<double> bias;
  double eps = 1e-12;
  /// K^3 grid-ordered weights, only for Pooling::linear.
  std::vector<double> linear_weights;
  /// Voxels per streamed reconstruction block.
  std::size_t block_voxels = 4096;

  int grid_size() const { return K > 0 ? K : default_grid_size(pooling); }
  /// Throws DomainError / ShapeError for an unusable config.
  void validate(int d_out) const;
};

struct LayerGradients {
  FilterCoefficients d_coefficients;
  VoxelGrid d_input;
  std::vector<double> d_bias;
};

struct ForwardResult;

/// Everything ilpo_backward needs from one forward call. Move-only and
/// consumed by exactly one backward call.
class ForwardTape {
 public:
  ForwardTape(const ForwardTape&) = delete;
  ForwardTape& operator=(const ForwardTape&) = delete;
  ForwardTape(ForwardTape&& other) noexcept;
  ForwardTape& operator=(ForwardTape&& other) noexcept;
  ~ForwardTape();

  bool valid() const { return state_ != nullptr; }

 private:
  struct State;
  explicit ForwardTape(std::unique_ptr<State> state);
  std::unique_ptr<State> state_;

  friend struct ForwardResult;
  friend ForwardResult ilpo_forward(const VoxelGrid&, const FilterCoefficients&, const IlpoLayerConfig&);
  friend LayerGradients ilpo_backward(ForwardTape&&, const VoxelGrid&);
};

struct ForwardResult {
  VoxelGrid output;
  ForwardTape tape;
};

/// expand -> coefficient convolution -> reconstruct on make_so3_grid(K) -> pool -> bias.
ForwardResult ilpo_forward(const VoxelGrid& input, const FilterCoefficients& c, const IlpoLayerConfig& cfg);

/// Reverse-mode derivatives of the loss sum(d_output * output). Throws
/// TapeError for a consumed tape or a d_output whose shape differs from the
/// forward output.
LayerGradients ilpo_backward(ForwardTape&& tape, const VoxelGrid& d_output);

struct GradcheckOptions {
  int N = 5;
  int d_in = 2;
  int d_out = 2;
  int coefficient_samples = 40;
  int input_samples = 40;
  double step = 1e-5;
  /// Voxels with some |h| below this (softmax) or a top-two gap below it
  /// (hardmax) get zero upstream gradient so no kink is crossed.
  double guard = 1e-3;
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  double max_rel_error_coefficients = 0.0;
  double max_rel_error_input = 0.0;
  std::size_t coordinates = 0;
  std::size_t guarded_voxels = 0;
  /// Coordinates where both derivatives are below 1e-10 in magnitude, i.e. the
  /// sampled map does not depend on them; excluded from max_rel_error_nonnull
  /// only.
  std::size_t null_coordinates = 0;
  double max_rel_error_nonnull = 0.0;
};

/// Central-difference check of ilpo_backward on a random instance. For
/// Pooling::linear with no weights given, random weights are drawn from `seed`.
GradcheckReport gradcheck(std::uint64_t seed, const IlpoLayerConfig& cfg, const GradcheckOptions& opts = {});

}  // namespace ilpo
