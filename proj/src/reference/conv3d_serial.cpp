#include "ilpo/conv3d.hpp"
#include "ilpo/error.hpp"

namespace ilpo::reference {

CoefficientMaps coefficient_convolution_serial(const VoxelGrid& input, const ExpandedFilter& filt,
                                               Padding padding) {
  const int L = filt.L();
  if (input.channels() != filt.d_in()) throw ShapeError("channel mismatch");
  if (padding == Padding::valid && (input.X() < L || input.Y() < L || input.Z() < L)) {
    throw ShapeError("input smaller than filter");
  }
  const int OX = output_extent(input.X(), L, padding);
  const int OY = output_extent(input.Y(), L, padding);
  const int OZ = output_extent(input.Z(), L, padding);
  const int shift = padding == Padding::same ? -(L / 2) : 0;
  CoefficientMaps maps(filt.d_out(), L, OX, OY, OZ);

  for (int o = 0; o < filt.d_out(); ++o) {
    for (std::size_t k = 0; k < filt.kernels(); ++k) {
      std::span<double> h = maps.field(o, k);
      for (int x = 0; x < OX; ++x) {
        for (int y = 0; y < OY; ++y) {
          for (int z = 0; z < OZ; ++z) {
            double acc = 0.0;
            for (int ci = 0; ci < filt.d_in(); ++ci) {
              const std::span<const double> g = filt.kernel(o, ci, k);
              for (int a = 0; a < L; ++a) {
                for (int b = 0; b < L; ++b) {
                  for (int c = 0; c < L; ++c) {
                    const int ix = x + a + shift, iy = y + b + shift, iz = z + c + shift;
                    if (ix < 0 || iy < 0 || iz < 0 || ix >= input.X() || iy >= input.Y() || iz >= input.Z()) {
                      continue;
                    }
                    acc += input(ci, ix, iy, iz) * g[(a * L + b) * L + c];
                  }
                }
              }
            }
            h[(static_cast<std::size_t>(x) * OY + y) * OZ + z] = acc;
          }
        }
      }
    }
  }
  return maps;
}

}  // namespace ilpo::reference
