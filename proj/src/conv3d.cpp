#include "ilpo/conv3d.hpp"

#include <algorithm>
#include <cstring>

#include "ilpo/error.hpp"

namespace ilpo {
namespace {

void check_input(const VoxelGrid& input, int d_in, int L, Padding padding) {
  if (input.channels() != d_in) {
    throw ShapeError("input has " + std::to_string(input.channels()) + " channels, filter expects " +
                     std::to_string(d_in));
  }
  if (padding == Padding::valid && (input.X() < L || input.Y() < L || input.Z() < L)) {
    throw ShapeError("valid padding needs input extents >= " + std::to_string(L) + ", got " +
                     input.shape_string());
  }
}

int read_shift(int L, Padding padding) { return padding == Padding::same ? -(L / 2) : 0; }

}  // namespace

VoxelGrid::VoxelGrid(int channels, int X, int Y, int Z) : channels_(channels), X_(X), Y_(Y), Z_(Z) {
  if (channels < 1 || X < 1 || Y < 1 || Z < 1) {
    throw ShapeError("voxel grid dimensions must be positive");
  }
  values_.assign(static_cast<std::size_t>(channels) * X * Y * Z, 0.0);
}

std::string VoxelGrid::shape_string() const {
  return "(C=" + std::to_string(channels_) + ", X=" + std::to_string(X_) + ", Y=" + std::to_string(Y_) +
         ", Z=" + std::to_string(Z_) + ")";
}

bool identical(const VoxelGrid& a, const VoxelGrid& b) {
  return a.same_shape(b) &&
         std::memcmp(a.values().data(), b.values().data(), a.values().size() * sizeof(double)) == 0;
}

CoefficientMaps::CoefficientMaps(int d_out, int L, int X, int Y, int Z)
    : d_out_(d_out), L_(L), X_(X), Y_(Y), Z_(Z) {
  values_.assign(static_cast<std::size_t>(d_out) * kernel_count(L) * X * Y * Z, 0.0);
}

int output_extent(int input_extent, int L, Padding padding) {
  return padding == Padding::same ? input_extent : input_extent - L + 1;
}

CoefficientMaps coefficient_convolution(const VoxelGrid& input, const ExpandedFilter& filt, Padding padding) {
  const int L = filt.L();
  check_input(input, filt.d_in(), L, padding);
  const int OX = output_extent(input.X(), L, padding);
  const int OY = output_extent(input.Y(), L, padding);
  const int OZ = output_extent(input.Z(), L, padding);
  CoefficientMaps maps(filt.d_out(), L, OX, OY, OZ);
  const int shift = read_shift(L, padding);
  const std::size_t nk = filt.kernels();
  const std::size_t vol = static_cast<std::size_t>(filt.volume());
  const std::size_t ovox = maps.voxels();
  const int d_out = filt.d_out();
  const int d_in = filt.d_in();
  const double* g_all = filt.values().data();
  double* h_all = maps.values().data();

#pragma omp parallel
  {
    std::vector<double> acc(nk);
#pragma omp for collapse(2) schedule(static)
    for (int o = 0; o < d_out; ++o) {
      for (int x = 0; x < OX; ++x) {
        for (int y = 0; y < OY; ++y) {
          for (int z = 0; z < OZ; ++z) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int ci = 0; ci < d_in; ++ci) {
              const double* g = g_all + filt.offset(o, ci, 0);
              for (int a = 0; a < L; ++a) {
                const int ix = x + a + shift;
                if (ix < 0 || ix >= input.X()) continue;
                for (int b = 0; b < L; ++b) {
                  const int iy = y + b + shift;
                  if (iy < 0 || iy >= input.Y()) continue;
                  for (int c = 0; c < L; ++c) {
                    const int iz = z + c + shift;
                    if (iz < 0 || iz >= input.Z()) continue;
                    const double v = input(ci, ix, iy, iz);
                    const double* gv = g + (a * L + b) * L + c;
                    for (std::size_t k = 0; k < nk; ++k) acc[k] += v * gv[k * vol];
                  }
                }
              }
            }
            const std::size_t p = (static_cast<std::size_t>(x) * OY + y) * OZ + z;
            for (std::size_t k = 0; k < nk; ++k) h_all[(o * nk + k) * ovox + p] = acc[k];
          }
        }
      }
    }
  }
  return maps;
}

VoxelGrid conv_adjoint_input(const CoefficientMaps& grad, const ExpandedFilter& filt, Padding padding, int X,
                             int Y, int Z) {
  const int L = filt.L();
  if (grad.d_out() != filt.d_out() || grad.L() != L) throw ShapeError("conv_adjoint_input: filter mismatch");
  if (grad.X() != output_extent(X, L, padding) || grad.Y() != output_extent(Y, L, padding) ||
      grad.Z() != output_extent(Z, L, padding)) {
    throw ShapeError("conv_adjoint_input: gradient extent does not match input extent");
  }
  VoxelGrid out(filt.d_in(), X, Y, Z);
  const int shift = read_shift(L, padding);
  const std::size_t nk = filt.kernels();
  const int OX = grad.X(), OY = grad.Y(), OZ = grad.Z();
  const int d_in = filt.d_in();
  const int d_out = filt.d_out();

#pragma omp parallel for collapse(2) schedule(static)
  for (int ci = 0; ci < d_in; ++ci) {
    for (int px = 0; px < X; ++px) {
      for (int py = 0; py < Y; ++py) {
        for (int pz = 0; pz < Z; ++pz) {
          double acc = 0.0;
          for (int o = 0; o < d_out; ++o) {
            for (std::size_t k = 0; k < nk; ++k) {
              const std::span<const double> g = filt.kernel(o, ci, k);
              const std::span<const double> h = grad.field(o, k);
              for (int a = 0; a < L; ++a) {
                const int x = px - a - shift;
                if (x < 0 || x >= OX) continue;
                for (int b = 0; b < L; ++b) {
                  const int y = py - b - shift;
                  if (y < 0 || y >= OY) continue;
                  for (int c = 0; c < L; ++c) {
                    const int z = pz - c - shift;
                    if (z < 0 || z >= OZ) continue;
                    acc += g[(a * L + b) * L + c] * h[(static_cast<std::size_t>(x) * OY + y) * OZ + z];
                  }
                }
              }
            }
          }
          out(ci, px, py, pz) = acc;
        }
      }
    }
  }
  return out;
}

ExpandedFilter conv_adjoint_filter(const VoxelGrid& input, const CoefficientMaps& grad, Padding padding) {
  const int L = grad.L();
  const int d_in = input.channels();
  const int d_out = grad.d_out();
  if (grad.X() != output_extent(input.X(), L, padding) || grad.Y() != output_extent(input.Y(), L, padding) ||
      grad.Z() != output_extent(input.Z(), L, padding)) {
    throw ShapeError("conv_adjoint_filter: gradient extent does not match input extent");
  }
  ExpandedFilter out(L, d_in, d_out);
  const int shift = read_shift(L, padding);
  const std::size_t nk = out.kernels();
  const std::size_t vol = static_cast<std::size_t>(out.volume());
  const int OX = grad.X(), OY = grad.Y(), OZ = grad.Z();

#pragma omp parallel for collapse(2) schedule(static)
  for (int o = 0; o < d_out; ++o) {
    for (int ci = 0; ci < d_in; ++ci) {
      double* dg = out.values().data() + out.offset(o, ci, 0);
      for (int x = 0; x < OX; ++x) {
        for (int y = 0; y < OY; ++y) {
          for (int z = 0; z < OZ; ++z) {
            const std::size_t p = (static_cast<std::size_t>(x) * OY + y) * OZ + z;
            for (int a = 0; a < L; ++a) {
              const int ix = x + a + shift;
              if (ix < 0 || ix >= input.X()) continue;
              for (int b = 0; b < L; ++b) {
                const int iy = y + b + shift;
                if (iy < 0 || iy >= input.Y()) continue;
                for (int c = 0; c < L; ++c) {
                  const int iz = z + c + shift;
                  if (iz < 0 || iz >= input.Z()) continue;
                  const double v = input(ci, ix, iy, iz);
                  const std::size_t tap = static_cast<std::size_t>((a * L + b) * L + c);
                  for (std::size_t k = 0; k < nk; ++k) dg[k * vol + tap] += v * grad.field(o, k)[p];
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

VoxelGrid direct_convolution(const VoxelGrid& input, std::span<const double> kernels, int L, int d_out,
                             Padding padding) {
  const int d_in = input.channels();
  const std::size_t vol = static_cast<std::size_t>(L) * L * L;
  if (kernels.size() != static_cast<std::size_t>(d_out) * d_in * vol) {
    throw ShapeError("direct_convolution: kernel tensor size mismatch");
  }
  check_input(input, d_in, L, padding);
  const int OX = output_extent(input.X(), L, padding);
  const int OY = output_extent(input.Y(), L, padding);
  const int OZ = output_extent(input.Z(), L, padding);
  VoxelGrid out(d_out, OX, OY, OZ);
  const int shift = read_shift(L, padding);

#pragma omp parallel for collapse(2) schedule(static)
  for (int o = 0; o < d_out; ++o) {
    for (int x = 0; x < OX; ++x) {
      for (int y = 0; y < OY; ++y) {
        for (int z = 0; z < OZ; ++z) {
          double acc = 0.0;
          for (int ci = 0; ci < d_in; ++ci) {
            const double* g = kernels.data() + (static_cast<std::size_t>(o) * d_in + ci) * vol;
            for (int a = 0; a < L; ++a) {
              const int ix = x + a + shift;
              if (ix < 0 || ix >= input.X()) continue;
              for (int b = 0; b < L; ++b) {
                const int iy = y + b + shift;
                if (iy < 0 || iy >= input.Y()) continue;
                for (int c = 0; c < L; ++c) {
                  const int iz = z + c + shift;
                  if (iz < 0 || iz >= input.Z()) continue;
                  acc += input(ci, ix, iy, iz) * g[(a * L + b) * L + c];
                }
              }
            }
          }
          out(o, x, y, z) = acc;
        }
      }
    }
  }
  return out;
}

}  // namespace ilpo
