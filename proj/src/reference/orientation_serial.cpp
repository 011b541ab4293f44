#include "ilpo/orientation.hpp"

namespace ilpo::reference {

OrientationMap reconstruct_serial(const CoefficientMaps& maps, const SO3Grid& grid) {
  OrientationMap m(maps.d_out(), maps.X(), maps.Y(), maps.Z(), grid);
  const GridWignerTable table(grid, maps.L());
  std::vector<double> coeffs(maps.kernels());
  for (int o = 0; o < maps.d_out(); ++o) {
    for (std::size_t v = 0; v < maps.voxels(); ++v) {
      for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] = maps.field(o, k)[v];
      table.synthesize(coeffs, m.slice(o, v));
    }
  }
  return m;
}

OrientationMap reconstruct_naive(const CoefficientMaps& maps, const SO3Grid& grid) {
  OrientationMap m(maps.d_out(), maps.X(), maps.Y(), maps.Z(), grid);
  WignerCoefficients c(maps.L());
  for (int o = 0; o < maps.d_out(); ++o) {
    for (std::size_t v = 0; v < maps.voxels(); ++v) {
      for (std::size_t k = 0; k < c.values().size(); ++k) c.values()[k] = maps.field(o, k)[v];
      std::span<double> slice = m.slice(o, v);
      for (std::size_t i = 0; i < grid.size(); ++i) slice[i] = synthesize_so3(c, grid.rotation(i));
    }
  }
  return m;
}

}  // namespace ilpo::reference
