#include "ilpo/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "ilpo/error.hpp"

namespace ilpo {
namespace {

constexpr char kVoxelMagic[8] = {'I', 'L', 'P', 'O', 'V', 'O', 'X', '1'};
constexpr const char* kFilterTag = "ILPOFILT1";

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

std::uint64_t get_le(const std::string& in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + static_cast<std::size_t>(b)])) << (8 * b);
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read failed on '" + path + "'");
  return data;
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError("write failed on '" + path + "'");
}

int json_int(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer()) {
    throw FormatError(key, -1, std::string("filter file: field '") + key + "' must be an integer");
  }
  return doc[key].get<int>();
}

const nlohmann::json& json_array(const nlohmann::json& node, std::size_t size, const std::string& field) {
  if (!node.is_array() || node.size() != size) {
    throw FormatError(field, -1,
                      "filter file: field '" + field + "' must be an array of length " + std::to_string(size));
  }
  return node;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string encode_voxel_grid(const VoxelGrid& grid) {
  std::string out(kVoxelMagic, sizeof kVoxelMagic);
  out.reserve(24 + grid.values().size() * 8);
  put_u32(out, static_cast<std::uint32_t>(grid.channels()));
  put_u32(out, static_cast<std::uint32_t>(grid.X()));
  put_u32(out, static_cast<std::uint32_t>(grid.Y()));
  put_u32(out, static_cast<std::uint32_t>(grid.Z()));
  for (double v : grid.values()) put_f64(out, v);
  return out;
}

VoxelGrid decode_voxel_grid(const std::string& bytes) {
  if (bytes.size() < sizeof kVoxelMagic) {
    throw FormatError("magic", static_cast<std::int64_t>(bytes.size()), "voxel file: truncated before magic");
  }
  for (std::size_t i = 0; i < sizeof kVoxelMagic; ++i) {
    if (bytes[i] != kVoxelMagic[i]) {
      throw FormatError("magic", static_cast<std::int64_t>(i), "voxel file: bad magic at byte " + std::to_string(i));
    }
  }
  static const char* names[4] = {"C", "X", "Y", "Z"};
  std::uint32_t dims[4];
  for (int d = 0; d < 4; ++d) {
    const std::size_t at = 8 + 4 * static_cast<std::size_t>(d);
    if (bytes.size() < at + 4) {
      throw FormatError(names[d], static_cast<std::int64_t>(at),
                        std::string("voxel file: truncated in dimension ") + names[d] + " at byte " +
                            std::to_string(at));
    }
    dims[d] = static_cast<std::uint32_t>(get_le(bytes, at, 4));
    if (dims[d] == 0 || dims[d] > (1u << 20)) {
      throw FormatError(names[d], static_cast<std::int64_t>(at),
                        std::string("voxel file: invalid dimension ") + names[d] + "=" + std::to_string(dims[d]) +
                            " at byte " + std::to_string(at));
    }
  }
  const std::uint64_t count = static_cast<std::uint64_t>(dims[0]) * dims[1] * dims[2] * dims[3];
  const std::uint64_t expected = 24 + 8 * count;
  if (bytes.size() != expected) {
    const std::int64_t at = static_cast<std::int64_t>(std::min<std::uint64_t>(bytes.size(), expected));
    throw FormatError("values", at,
                      "voxel file: expected " + std::to_string(expected) + " bytes, found " +
                          std::to_string(bytes.size()) + " (mismatch at byte " + std::to_string(at) + ")");
  }
  VoxelGrid grid(static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
                 static_cast<int>(dims[3]));
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t bits = get_le(bytes, 24 + 8 * i, 8);
    std::memcpy(&grid.values()[i], &bits, sizeof bits);
  }
  return grid;
}

void write_voxel_grid(const std::string& path, const VoxelGrid& grid) { write_file(path, encode_voxel_grid(grid)); }

VoxelGrid read_voxel_grid(const std::string& path) { return decode_voxel_grid(read_file(path)); }

std::string encode_filter(const FilterCoefficients& c) {
  const FilterGeometry& geo = c.geometry();
  std::ostringstream s;
  s << "{\n  \"format\": \"" << kFilterTag << "\",\n  \"L\": " << c.L() << ",\n  \"d_in\": " << c.d_in()
    << ",\n  \"d_out\": " << c.d_out() << ",\n  \"shells\": [";
  for (int i = 0; i < geo.shell_count(); ++i) s << (i ? ", " : "") << format_double(geo.shells()[i]);
  s << "],\n  \"coeffs\": [";
  for (int o = 0; o < c.d_out(); ++o) {
    s << (o ? ",\n    [" : "\n    [");
    for (int i = 0; i < c.d_in(); ++i) {
      s << (i ? ", [" : "[");
      for (int l = 0; l < c.L(); ++l) {
        s << (l ? ", [" : "[");
        for (int m = -l; m <= l; ++m) {
          s << (m > -l ? ", [" : "[");
          for (int sh = 0; sh < geo.shell_count(); ++sh) s << (sh ? ", " : "") << format_double(c(o, i, l, m, sh));
          s << "]";
        }
        s << "]";
      }
      s << "]";
    }
    s << "]";
  }
  s << "\n  ]\n}\n";
  return s.str();
}

FilterCoefficients decode_filter(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("json", static_cast<std::int64_t>(e.byte), std::string("filter file: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("json", 0, "filter file: top level must be an object");
  if (!doc.contains("format") || !doc["format"].is_string() || doc["format"].get<std::string>() != kFilterTag) {
    throw FormatError("format", -1, std::string("filter file: field 'format' must be \"") + kFilterTag + "\"");
  }
  const int L = json_int(doc, "L");
  const int d_in = json_int(doc, "d_in");
  const int d_out = json_int(doc, "d_out");
  if (L < 1 || L % 2 == 0) throw FormatError("L", -1, "filter file: L must be odd and positive");
  if (d_in < 1 || d_out < 1) throw FormatError("d_in", -1, "filter file: channel counts must be positive");

  FilterCoefficients c(L, d_in, d_out);
  const FilterGeometry& geo = c.geometry();
  const std::size_t ns = static_cast<std::size_t>(geo.shell_count());
  const nlohmann::json shells_node = doc.value("shells", nlohmann::json());
  const nlohmann::json& shells = json_array(shells_node, ns, "shells");
  for (std::size_t i = 0; i < ns; ++i) {
    if (!shells[i].is_number() || std::abs(shells[i].get<double>() - geo.shells()[i]) > 1e-9) {
      throw FormatError("shells", -1,
                        "filter file: shell " + std::to_string(i) + " does not match radius " +
                            format_double(geo.shells()[i]));
    }
  }
  const nlohmann::json coeffs_node = doc.value("coeffs", nlohmann::json());
  const nlohmann::json& coeffs = json_array(coeffs_node, static_cast<std::size_t>(d_out), "coeffs");
  for (int o = 0; o < d_out; ++o) {
    const std::string fo = "coeffs[" + std::to_string(o) + "]";
    const nlohmann::json& co = json_array(coeffs[o], static_cast<std::size_t>(d_in), fo);
    for (int i = 0; i < d_in; ++i) {
      const std::string fi = fo + "[" + std::to_string(i) + "]";
      const nlohmann::json& ci = json_array(co[i], static_cast<std::size_t>(L), fi);
      for (int l = 0; l < L; ++l) {
        const std::string fl = fi + "[" + std::to_string(l) + "]";
        const nlohmann::json& cl = json_array(ci[l], static_cast<std::size_t>(2 * l + 1), fl);
        for (int m = -l; m <= l; ++m) {
          const std::string fm = fl + "[" + std::to_string(m + l) + "]";
          const nlohmann::json& cm = json_array(cl[m + l], ns, fm);
          for (std::size_t sh = 0; sh < ns; ++sh) {
            if (!cm[sh].is_number()) throw FormatError(fm, -1, "filter file: '" + fm + "' holds a non-number");
            const double v = cm[sh].get<double>();
            if (c.masked(l, static_cast<int>(sh)) && v != 0.0) {
              throw FormatError(fm, -1, "filter file: '" + fm + "' sets a coefficient on the r=0 shell with l>0");
            }
            c(o, i, l, m, static_cast<int>(sh)) = v;
          }
        }
      }
    }
  }
  return c;
}

void write_filter(const std::string& path, const FilterCoefficients& c) { write_file(path, encode_filter(c)); }

FilterCoefficients read_filter(const std::string& path) { return decode_filter(read_file(path)); }

}  // namespace ilpo
