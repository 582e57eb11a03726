#include <doctest.h>

#include <cmath>

#include "cpath/colorspace.hpp"
#include "cpath/error.hpp"
#include "support/oracles.hpp"

using namespace cpath;

TEST_CASE("rgb_to_hsv reference colors") {
  const auto red = rgb_to_hsv({255, 0, 0});
  CHECK(red.h == 0.0);
  CHECK(red.s == 1.0);
  CHECK(red.v == 1.0);

  const auto gray = rgb_to_hsv({128, 128, 128});
  CHECK(gray.h == 0.0);
  CHECK(gray.s == 0.0);
  CHECK(gray.v == doctest::Approx(0.50196).epsilon(1e-5));

  const auto cyan = rgb_to_hsv({0, 255, 255});
  CHECK(cyan.h == 0.5);
  CHECK(cyan.s == 1.0);
  CHECK(cyan.v == 1.0);

  const auto black = rgb_to_hsv({0, 0, 0});
  CHECK(black.h == 0.0);
  CHECK(black.s == 0.0);
  CHECK(black.v == 0.0);
}

TEST_CASE("rgb_to_hsv agrees with a degree-based conversion on the whole cube") {
  double worst = 0.0;
  for (int r = 0; r < 256; r += 3)
    for (int g = 0; g < 256; g += 5)
      for (int b = 0; b < 256; b += 7) {
        const auto got = rgb_to_hsv({static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                     static_cast<std::uint8_t>(b)});
        long double h, s, v;
        oracle::hsv_degrees(r, g, b, h, s, v);
        worst = std::max({worst, std::fabs(got.h - static_cast<double>(h)), std::fabs(got.s - static_cast<double>(s)),
                          std::fabs(got.v - static_cast<double>(v))});
        REQUIRE(got.h >= 0.0);
        REQUIRE(got.h < 1.0);
      }
  CHECK(worst < 1e-12);
}

TEST_CASE("hue of achromatic pixels is zero") {
  for (int v = 0; v < 256; ++v) {
    const auto p = rgb_to_hsv({static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v)});
    CHECK(p.h == 0.0);
    CHECK(p.s == 0.0);
  }
}

TEST_CASE("patch construction") {
  Patch p(3, 2);
  CHECK(p.pixel_count() == 6);
  CHECK_FALSE(p.empty());
  p.at(2, 1) = {1, 2, 3};
  CHECK(p.pixels()[5] == RgbPixel{1, 2, 3});
  CHECK(Patch().empty());
  CHECK_THROWS_AS(Patch(2, 2, std::vector<RgbPixel>(3)), Error);
}
