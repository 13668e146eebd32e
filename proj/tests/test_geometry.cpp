#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "beamloc/geometry.hpp"
#include "test_helpers.hpp"

using namespace beamloc;

TEST_CASE("spiral array with one mic sits at the full radius") {
  const auto geom = build_spiral_array(1, 0.75);
  REQUIRE(geom.count() == 1);
  const auto& p = geom.positions[0];
  CHECK(std::hypot(p.x, p.y) == Catch::Approx(0.75).epsilon(1e-12));
  CHECK(p.z == 0.0);
}

TEST_CASE("spiral array of 56 mics stays within the aperture") {
  const auto geom = build_spiral_array(56, 0.75);
  REQUIRE(geom.count() == 56);
  double max_r = 0.0;
  for (const auto& p : geom.positions) {
    max_r = std::max(max_r, std::hypot(p.x, p.y));
    CHECK(p.z == 0.0);
  }
  CHECK(max_r == Catch::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("spiral mics are pairwise separated") {
  const auto geom = build_spiral_array(56, 0.75);
  double min_dist = 1e9;
  for (std::size_t i = 0; i < geom.count(); ++i)
    for (std::size_t j = i + 1; j < geom.count(); ++j)
      min_dist = std::min(min_dist, distance(geom.positions[i], geom.positions[j]));
  CHECK(min_dist > 0.01);
  geom.validate();
}

TEST_CASE("spiral array rejects bad parameters") {
  CHECK_THROWS_AS(build_spiral_array(0, 0.75), InvalidArgument);
  CHECK_THROWS_AS(build_spiral_array(-3, 0.75), InvalidArgument);
  CHECK_THROWS_AS(build_spiral_array(56, 0.0), InvalidArgument);
  CHECK_THROWS_AS(build_spiral_array(56, -1.0), InvalidArgument);
}

TEST_CASE("spiral generation is deterministic") {
  const auto a = build_spiral_array(56, 0.75);
  const auto b = build_spiral_array(56, 0.75);
  for (std::size_t i = 0; i < a.count(); ++i) {
    CHECK(a.positions[i].x == b.positions[i].x);
    CHECK(a.positions[i].y == b.positions[i].y);
  }
}

TEST_CASE("geometry file round-trips") {
  testutil::TempDir tmp("geom");
  const auto geom = build_spiral_array(8, 0.5);
  save_geometry(tmp.file("g.json"), geom);
  const auto loaded = load_geometry(tmp.file("g.json"));
  REQUIRE(loaded.count() == geom.count());
  for (std::size_t i = 0; i < geom.count(); ++i) {
    CHECK(loaded.positions[i].x == geom.positions[i].x);
    CHECK(loaded.positions[i].y == geom.positions[i].y);
    CHECK(loaded.positions[i].z == geom.positions[i].z);
  }
  CHECK(geometry_hash(loaded) == geometry_hash(geom));
}

TEST_CASE("geometry loader rejects malformed files") {
  testutil::TempDir tmp("geom_bad");
  {
    auto os = beamloc::io::open_out(tmp.file("bad.json"), false);
    os << "{\"not\": \"a list\"}\n";
  }
  CHECK_THROWS_AS(load_geometry(tmp.file("bad.json")), FormatError);
  {
    auto os = beamloc::io::open_out(tmp.file("bad2.json"), false);
    os << "[[1, 2]]\n";
  }
  CHECK_THROWS_AS(load_geometry(tmp.file("bad2.json")), FormatError);
}

TEST_CASE("scan grid enumerates nodes row-major") {
  ScanGrid grid;
  grid.x_min = -1.5;
  grid.x_max = 1.5;
  grid.y_min = -1.5;
  grid.y_max = 1.5;
  grid.nx = 31;
  grid.ny = 31;
  grid.validate();
  CHECK(grid.size() == 961);
  CHECK(grid.node_x(0) == Catch::Approx(-1.5));
  CHECK(grid.node_x(30) == Catch::Approx(1.5));
  CHECK(grid.node_x(15) == Catch::Approx(0.0).margin(1e-12));
  // index iy * nx + ix, x fastest
  CHECK(grid.node_x_of(1) == Catch::Approx(-1.4));
  CHECK(grid.node_y_of(1) == Catch::Approx(-1.5));
  CHECK(grid.node_y_of(31) == Catch::Approx(-1.4));
}

TEST_CASE("nearest node snaps and clamps") {
  ScanGrid grid;  // defaults: [-1.5, 1.5]^2, 31 x 31
  const auto g = grid.nearest_node(0.04, -0.06);
  CHECK(grid.node_x_of(g) == Catch::Approx(0.0).margin(1e-12));
  CHECK(grid.node_y_of(g) == Catch::Approx(-0.1));
  const auto edge = grid.nearest_node(9.0, -9.0);
  CHECK(grid.node_x_of(edge) == Catch::Approx(1.5));
  CHECK(grid.node_y_of(edge) == Catch::Approx(-1.5));
}

TEST_CASE("scan grid validates its extent") {
  ScanGrid bad;
  bad.x_min = 1.0;
  bad.x_max = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  ScanGrid tiny;
  tiny.nx = 1;
  CHECK_THROWS_AS(tiny.validate(), InvalidArgument);
}
