#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

#include "ilpo/error.hpp"
#include "ilpo/experiments.hpp"
#include "ilpo/io.hpp"

using namespace ilpo;

namespace {

template <class F>
FormatError capture(F&& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e;
  }
  FAIL("no FormatError thrown");
  return FormatError("", -1, "");
}

std::string temp_path(const std::string& name) { return std::string(P_tmpdir) + "/ilpo_test_" + name; }

}  // namespace

TEST_CASE("voxel grids round-trip bitwise") {
  std::mt19937_64 rng(1);
  VoxelGrid g = random_voxels(rng, 2, 3);
  g.values()[0] = -0.0;
  g.values()[1] = std::numeric_limits<double>::denorm_min();
  g.values()[2] = 1e308;
  const std::string bytes = encode_voxel_grid(g);
  CHECK(bytes.size() == 24 + 8 * 54);
  CHECK(bytes.substr(0, 8) == "ILPOVOX1");
  CHECK(bytes[8] == 2);
  CHECK(identical(decode_voxel_grid(bytes), g));

  const std::string path = temp_path("grid.vox");
  write_voxel_grid(path, g);
  CHECK(identical(read_voxel_grid(path), g));
  std::remove(path.c_str());
}

TEST_CASE("malformed voxel files name the field and byte offset") {
  const std::string good = encode_voxel_grid(VoxelGrid(1, 2, 2, 2));
  std::string bad = good;
  bad[3] = 'x';
  FormatError e = capture([&] { decode_voxel_grid(bad); });
  CHECK(e.field() == "magic");
  CHECK(e.offset() == 3);

  e = capture([&] { decode_voxel_grid(good.substr(0, 14)); });
  CHECK(e.field() == "X");
  CHECK(e.offset() == 12);

  bad = good;
  bad[16] = 0;
  e = capture([&] { decode_voxel_grid(bad); });
  CHECK(e.field() == "Y");
  CHECK(e.offset() == 16);

  e = capture([&] { decode_voxel_grid(good.substr(0, good.size() - 3)); });
  CHECK(e.field() == "values");
  CHECK(e.offset() == static_cast<std::int64_t>(good.size() - 3));

  e = capture([&] { decode_voxel_grid(good + "z"); });
  CHECK(e.field() == "values");
}

TEST_CASE("missing files raise IoError") {
  CHECK_THROWS_AS(read_voxel_grid("/nonexistent/dir/x.vox"), IoError);
  CHECK_THROWS_AS(read_filter("/nonexistent/dir/x.json"), IoError);
  CHECK_THROWS_AS(write_voxel_grid("/nonexistent/dir/x.vox", VoxelGrid(1, 1, 1, 1)), IoError);
}

TEST_CASE("filters round-trip through JSON exactly") {
  const FilterCoefficients c = random_filter(3, 3, 2, 3, 0.7);
  const FilterCoefficients back = decode_filter(encode_filter(c));
  CHECK(back.L() == 3);
  CHECK(back.d_in() == 2);
  CHECK(back.d_out() == 3);
  CHECK(back.values() == c.values());

  const std::string path = temp_path("filter.json");
  write_filter(path, c);
  CHECK(read_filter(path).values() == c.values());
  std::remove(path.c_str());
}

TEST_CASE("malformed filter files are rejected with the offending field") {
  const FilterCoefficients c = random_filter(4, 3, 1, 1, 1.0);
  const std::string good = encode_filter(c);

  CHECK(capture([&] { decode_filter("{\"format\": "); }).field() == "json");
  CHECK(capture([&] { decode_filter("[1, 2]"); }).field() == "json");

  std::string text = good;
  text.replace(text.find("ILPOFILT1"), 9, "ILPOFILT2");
  CHECK(capture([&] { decode_filter(text); }).field() == "format");

  text = good;
  const auto at = text.find("\"L\": 3");
  REQUIRE(at != std::string::npos);
  text.replace(at, 6, "\"L\": 4");
  CHECK(capture([&] { decode_filter(text); }).field() == "L");

  FilterCoefficients masked = c;
  masked(0, 0, 1, 0, 0) = 1.0;  // bypasses the mask
  CHECK_THROWS_AS(decode_filter(encode_filter(masked)), FormatError);
}

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
