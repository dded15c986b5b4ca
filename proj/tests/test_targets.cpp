#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "crowdloc/targets/fidt.hpp"
#include "support/oracles.hpp"

using namespace crowdloc;
using namespace crowdloc::targets;

TEST_SUITE("targets") {
  TEST_CASE("point set rejects out-of-bounds points") {
    CHECK_THROWS_AS(PointSet(256, 256, {{256.0, 0.0}}), Error);
    CHECK_THROWS_AS(PointSet(8, 8, {{-0.5, 1.0}}), Error);
    CHECK_NOTHROW(PointSet(8, 8, {{7.9, 7.9}}));
  }

  TEST_CASE("point set rejects two points in one pixel") {
    try {
      PointSet(16, 16, {{3.0, 3.0}, {3.2, 2.9}});
      FAIL("expected a duplicate error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::invalid_argument);
      CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
  }

  TEST_CASE("cells round half up and clamp") {
    CHECK(PointSet::cell_of({2.5, 3.49}, 8, 8) == Cell{3, 3});
    CHECK(PointSet::cell_of({7.6, 0.0}, 8, 8) == Cell{7, 0});
  }

  TEST_CASE("distance transform small cases") {
    const auto d = distance_transform(PointSet(8, 8, {{3, 3}}));
    CHECK(d(3, 3) == 0.0);
    CHECK(d(3, 4) == doctest::Approx(1.0).epsilon(1e-12));
    const auto corner = distance_transform(PointSet(4, 4, {{0, 0}}));
    CHECK(corner(3, 3) == doctest::Approx(std::sqrt(18.0)).epsilon(1e-12));
  }

  TEST_CASE("distance transform requires annotations") {
    CHECK_THROWS_WITH_AS(distance_transform(PointSet(4, 4)), doctest::Contains("no annotations"), Error);
  }

  TEST_CASE("distance transform equals brute force") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const auto pts = testing::random_points(rng, 64, 64, 20, trial % 2 == 1);
      const auto d = distance_transform(pts);
      const auto oracle = testing::brute_distance(pts.points(), 64, 64);
      double worst = 0.0;
      for (std::size_t i = 0; i < oracle.size(); ++i) worst = std::max(worst, std::abs(d.values()[i] - oracle[i]));
      CHECK(worst <= 1e-9);
    }
  }

  TEST_CASE("distance transform on non-square grids") {
    std::mt19937_64 rng(5);
    for (auto [h, w] : {std::pair{1, 17}, std::pair{23, 1}, std::pair{9, 40}}) {
      const auto pts = testing::random_points(rng, h, w, 4);
      const auto d = distance_transform(pts);
      const auto oracle = testing::brute_distance(pts.points(), h, w);
      for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(d.values()[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("fidt scalar values") {
    CHECK(fidt_value(0.0) == 1.0);
    CHECK(fidt_value(1.0, {0.3, 2.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(fidt_value(2.0) - testing::fidt_oracle(2.0)) < 1e-15);
    CHECK(std::abs(fidt_value(2.0) - 0.3664) < 1e-4);
    CHECK(fidt_value(0.0, {0.02, 0.75, 4.0}) == doctest::Approx(0.25));
  }

  TEST_CASE("fidt guards the denominator") {
    CHECK_THROWS_WITH_AS(fidt_value(1.0, {0.02, 0.75, 0.0}), doctest::Contains("division-by-zero guard violated"),
                         Error);
    CHECK_THROWS_AS(fidt_map(PointSet(4, 4, {{1, 1}}), {0.02, 0.75, -1.0}), Error);
  }

  TEST_CASE("fidt is strictly decreasing in distance") {
    double previous = fidt_value(0.0);
    for (int k = 1; k <= 40000; ++k) {
      const double v = fidt_value(k * 0.01);
      REQUIRE(v < previous);
      previous = v;
    }
  }

  TEST_CASE("fidt range and peaks") {
    std::mt19937_64 rng(3);
    const auto pts = testing::random_points(rng, 32, 32, 10);
    const auto map = fidt_map(pts);
    for (float v : map.values.values()) {
      CHECK(v > 0.0f);
      CHECK(v <= 1.0f);
    }
    for (const auto& c : pts.cells()) CHECK(map.values(c.row, c.col) == 1.0f);
  }

  TEST_CASE("fidt is translation equivariant") {
    const PointSet a(40, 40, {{5, 7}, {12, 20}, {30, 3}});
    const PointSet b(40, 40, {{8, 9}, {15, 22}, {33, 5}});
    const auto ma = fidt_map(a).values;
    const auto mb = fidt_map(b).values;
    // compare on the window where neither map sees a border effect from the shift
    for (int r = 0; r < 37; ++r) {
      for (int c = 0; c < 38; ++c) CHECK(ma(r, c) == mb(r + 3, c + 2));
    }
  }

  TEST_CASE("fidt file round trip is byte exact") {
    std::mt19937_64 rng(9);
    const auto map = fidt_map(testing::random_points(rng, 13, 29, 6)).values;
    const auto bytes = encode_fidt_file(map);
    CHECK(bytes.size() == 16 + 13 * 29 * 4);
    CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "FIDTMAP1");
    CHECK(bytes[8] == 13);
    CHECK(bytes[12] == 29);
    const auto back = decode_fidt_file(bytes);
    CHECK(back == map);
    CHECK(encode_fidt_file(back) == bytes);

    const auto path = std::filesystem::temp_directory_path() / "crowdloc_fidt_roundtrip.fidt";
    write_fidt_file(path, map);
    CHECK(read_fidt_file(path) == map);
    std::filesystem::remove(path);
  }

  TEST_CASE("fidt file rejects corrupt input") {
    std::vector<std::uint8_t> bytes = encode_fidt_file(Grid<float>(2, 2, 0.5f));
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_fidt_file(bad_magic), Error);
    bytes.pop_back();
    CHECK_THROWS_AS(decode_fidt_file(bytes), Error);
  }
}
