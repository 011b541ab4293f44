#pragma once

#include <string>

#include "ilpo/conv3d.hpp"
#include "ilpo/filter.hpp"

namespace ilpo {

/// "ILPOVOX1", u32 LE C, X, Y, Z, then C*X*Y*Z binary64 LE values in VoxelGrid order.
void write_voxel_grid(const std::string& path, const VoxelGrid& grid);
/// Throws IoError when the file cannot be opened and FormatError (with the byte
/// offset where parsing stopped) for a bad magic, bad dims or truncated data.
VoxelGrid read_voxel_grid(const std::string& path);

std::string encode_voxel_grid(const VoxelGrid& grid);
VoxelGrid decode_voxel_grid(const std::string& bytes);

/// JSON {format: "ILPOFILT1", L, d_in, d_out, shells, coeffs[out][in][l][m][shell]}
/// with 17 significant digits.
void write_filter(const std::string& path, const FilterCoefficients& c);
FilterCoefficients read_filter(const std::string& path);

std::string encode_filter(const FilterCoefficients& c);
/// Validates the format tag, the shell radii against the geometry for L, array
/// shapes and that masked (r = 0, l > 0) entries are zero.
FilterCoefficients decode_filter(const std::string& text);

/// %.17g formatting used by every text output.
std::string format_double(double v);

}  // namespace ilpo
