#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cpath/error.hpp"
#include "cpath/features.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace cpath;

namespace {

Patch constant_patch(std::size_t w, std::size_t h, RgbPixel c) {
  return Patch(w, h, std::vector<RgbPixel>(w * h, c));
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

}  // namespace

TEST_CASE("signed_cbrt") {
  CHECK(signed_cbrt(8.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(signed_cbrt(-27.0) == doctest::Approx(-3.0).epsilon(1e-15));
  CHECK(signed_cbrt(0.0) == 0.0);
  CHECK(signed_cbrt(-0.125) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(signed_cbrt(-1e-30) < 0.0);
}

TEST_CASE("bin_index edges") {
  CHECK(bin_index(255, 0, 256, 16) == 15);
  CHECK(bin_index(0, 0, 256, 16) == 0);
  CHECK(bin_index(1.0, 0, 1, 16) == 15);
  CHECK(bin_index(256, 0, 256, 16) == 15);
  CHECK(bin_index(16, 0, 256, 16) == 1);
  CHECK(bin_index(15.999, 0, 256, 16) == 0);
  CHECK(code_of([] { bin_index(-0.5, 0, 256, 16); }) == Errc::OutOfRange);
  CHECK(code_of([] { bin_index(1.0001, 0, 1, 16); }) == Errc::OutOfRange);
  CHECK(code_of([] { bin_index(std::nan(""), 0, 1, 16); }) == Errc::OutOfRange);
  CHECK(code_of([] { bin_index(0.5, 1, 0, 16); }) == Errc::InvalidArgument);
}

TEST_CASE("color moments reference patches") {
  SUBCASE("constant patch") {
    for (auto [w, h] : {std::pair<std::size_t, std::size_t>{1, 1}, {7, 3}, {64, 64}}) {
      const auto m = extract_color_moments(constant_patch(w, h, {100, 50, 200}));
      const std::array<double, 9> want{100, 0, 0, 50, 0, 0, 200, 0, 0};
      CHECK(m.values == want);
    }
  }
  SUBCASE("two-point patch") {
    const Patch p(2, 1, {{0, 0, 0}, {255, 255, 255}});
    const auto m = extract_color_moments(p);
    for (int c = 0; c < 3; ++c) {
      CHECK(m.values[3 * c] == 127.5);
      CHECK(m.values[3 * c + 1] == 127.5);
      CHECK(m.values[3 * c + 2] == 0.0);
    }
  }
  SUBCASE("empty patch") { CHECK(code_of([] { extract_color_moments(Patch()); }) == Errc::EmptyPatch); }
}

TEST_CASE("color moments match the two-pass oracle on a 64x64 random patch") {
  std::mt19937_64 rng(11);
  const auto p = synth::uniform_patch(rng, 64, 64);
  const auto got = extract_color_moments(p).values;
  const auto want = oracle::moments(p);
  for (int i = 0; i < 9; ++i) {
    const double scale = std::max(std::fabs(want[i]), 1e-300);
    CHECK(std::fabs(got[i] - want[i]) / scale <= 1e-9);
  }
}

TEST_CASE("skewness sign and mirror symmetry") {
  std::vector<RgbPixel> px(100, RgbPixel{10, 20, 30});
  for (int i = 0; i < 5; ++i) px[i * 7] = {240, 250, 200};
  const Patch dark(10, 10, px);
  std::vector<RgbPixel> mirrored;
  for (auto q : px)
    mirrored.push_back({static_cast<std::uint8_t>(255 - q.r), static_cast<std::uint8_t>(255 - q.g),
                        static_cast<std::uint8_t>(255 - q.b)});
  const auto a = extract_color_moments(dark).values;
  const auto b = extract_color_moments(Patch(10, 10, mirrored)).values;
  for (int c = 0; c < 3; ++c) {
    CHECK(a[3 * c + 2] > 0.0);
    CHECK(b[3 * c + 2] == -a[3 * c + 2]);
    CHECK(b[3 * c + 1] == a[3 * c + 1]);
  }
}

TEST_CASE("rgb histogram reference patches") {
  const auto h = extract_rgb_histogram(constant_patch(5, 5, {0, 0, 0}));
  REQUIRE(h.values.size() == 54);
  for (int c = 0; c < 3; ++c) {
    const auto block = h.block(c);
    CHECK(block[0] == 1.0);
    CHECK(std::accumulate(block.begin() + 1, block.end(), 0.0) == 0.0);
  }
  for (int i = 48; i < 54; ++i) CHECK(h.values[i] == 0.0);
  CHECK(code_of([] { extract_rgb_histogram(Patch()); }) == Errc::EmptyPatch);
  CHECK(code_of([] { extract_rgb_histogram(constant_patch(1, 1, {}), 0); }) == Errc::InvalidArgument);
  CHECK(code_of([] { extract_rgb_histogram(constant_patch(1, 1, {}), 257); }) == Errc::InvalidArgument);
}

TEST_CASE("rgb histogram matches the counting oracle") {
  std::mt19937_64 rng(5);
  for (int bins : {8, 16, 32, 64}) {
    const auto p = synth::uniform_patch(rng, 32, 32);
    const auto got = extract_rgb_histogram(p, bins).values;
    const auto want = oracle::rgb_histogram(p, bins);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - want[i]) <= 1e-12);
  }
}

TEST_CASE("hsv histogram reference patches") {
  const auto red = extract_hsv_histogram(constant_patch(4, 4, {255, 0, 0})).values;
  CHECK(red[0] == 1.0);
  CHECK(red[16 + 15] == 1.0);
  CHECK(red[32 + 15] == 1.0);
  CHECK(std::accumulate(red.begin(), red.begin() + 48, 0.0) == 3.0);
  const std::vector<double> stats(red.begin() + 48, red.end());
  CHECK(stats == std::vector<double>{0, 0, 1, 0, 1, 0});

  const auto gray = extract_hsv_histogram(constant_patch(3, 3, {128, 128, 128})).values;
  CHECK(gray[16] == 1.0);
  CHECK(gray[50] == 0.0);
}

TEST_CASE("hsv histogram matches the counting oracle") {
  std::mt19937_64 rng(9);
  for (int bins : {8, 16, 32}) {
    const auto p = synth::uniform_patch(rng, 32, 32);
    const auto got = extract_hsv_histogram(p, bins).values;
    const auto want = oracle::hsv_histogram(p, bins);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - want[i]) <= 1e-12);
  }
  // Hue values exactly on bin edges: pure primaries and secondaries.
  const Patch edges(6, 1, {{255, 0, 0}, {255, 255, 0}, {0, 255, 0}, {0, 255, 255}, {0, 0, 255}, {255, 0, 255}});
  const auto got = extract_hsv_histogram(edges, 12).values;
  const auto want = oracle::hsv_histogram(edges, 12);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - want[i]) <= 1e-12);
}

TEST_CASE("invariants: permutation, replication, normalization, moment consistency") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = synth::random_patch(rng, 40);
    const auto shuffled = synth::permute(p, rng);
    const auto replicated = synth::replicate(p, 3);
    for (auto method : {Extractor::Moments, Extractor::RgbHist, Extractor::HsvHist}) {
      const auto base = extract(p, method).values;
      CHECK(base.size() == feature_dim(method, 16));
      CHECK(extract(shuffled, method).values == base);
      CHECK(extract(replicated, method).values == base);
    }
    for (const auto& h : {extract_rgb_histogram(p), extract_hsv_histogram(p)})
      for (int c = 0; c < 3; ++c) {
        const auto b = h.block(c);
        CHECK(std::fabs(std::accumulate(b.begin(), b.end(), 0.0) - 1.0) <= 1e-12);
      }
    const auto m = extract_color_moments(p).values;
    const auto h = extract_rgb_histogram(p).values;
    for (int c = 0; c < 3; ++c) {
      CHECK(std::fabs(h[48 + 2 * c] - m[3 * c]) <= 1e-12);
      CHECK(std::fabs(h[48 + 2 * c + 1] - m[3 * c + 1]) <= 1e-12);
    }
  }
}

TEST_CASE("extractor names and dimensions") {
  CHECK(parse_extractor("moments") == Extractor::Moments);
  CHECK(parse_extractor("rgb-hist") == Extractor::RgbHist);
  CHECK(parse_extractor("hsv-hist") == Extractor::HsvHist);
  CHECK(extractor_name(Extractor::HsvHist) == "hsv-hist");
  CHECK_THROWS_AS(parse_extractor("lbp"), Error);
  CHECK(feature_dim(Extractor::Moments, 16) == 9);
  CHECK(feature_dim(Extractor::RgbHist, 16) == 54);
  CHECK(feature_dim(Extractor::HsvHist, 8) == 30);
}

TEST_CASE("parallel batch extraction equals the serial reference") {
  std::mt19937_64 rng(3);
  std::vector<Patch> patches;
  for (int i = 0; i < 60; ++i) patches.push_back(synth::random_patch(rng, 48));
  for (auto method : {Extractor::Moments, Extractor::RgbHist, Extractor::HsvHist}) {
    const auto par = extract_batch(patches, method);
    CHECK(par == serial::extract_batch(patches, method));
    for (std::size_t i = 0; i < patches.size(); ++i) {
      const auto one = extract(patches[i], method).values;
      CHECK(std::equal(one.begin(), one.end(), par.row(i).begin()));
    }
  }
  patches.push_back(Patch());
  CHECK(code_of([&] { extract_batch(patches, Extractor::Moments); }) == Errc::EmptyPatch);
}
