#pragma once

// Seeded generators for patches and toy classification sets.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cpath/colorspace.hpp"
#include "cpath/dataset.hpp"
#include "cpath/image_io.hpp"
#include "cpath/manifest.hpp"
#include "cpath/matrix.hpp"

namespace synth {

inline std::uint8_t clamp_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

inline cpath::Patch uniform_patch(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_int_distribution<int> u(0, 255);
  cpath::Patch p(w, h);
  for (auto& px : p.pixels()) px = {static_cast<std::uint8_t>(u(rng)), static_cast<std::uint8_t>(u(rng)),
                                    static_cast<std::uint8_t>(u(rng))};
  return p;
}

/// Random size in [1, max_side]^2; every fourth patch draws from a small
/// palette so repeated colors and ties are common.
inline cpath::Patch random_patch(std::mt19937_64& rng, std::size_t max_side) {
  std::uniform_int_distribution<std::size_t> side(1, max_side);
  const auto w = side(rng), h = side(rng);
  auto p = uniform_patch(rng, w, h);
  if (rng() % 4 == 0) {
    const auto palette = uniform_patch(rng, 5, 1);
    std::uniform_int_distribution<int> pick(0, 4);
    for (auto& px : p.pixels()) px = palette.pixels()[pick(rng)];
  }
  return p;
}

inline cpath::Patch gaussian_patch(std::mt19937_64& rng, std::size_t side, const double mean[3], double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  cpath::Patch p(side, side);
  for (auto& px : p.pixels()) {
    const double r = mean[0] + n(rng), g = mean[1] + n(rng), b = mean[2] + n(rng);
    px = {clamp_byte(r), clamp_byte(g), clamp_byte(b)};
  }
  return p;
}

inline cpath::Patch replicate(const cpath::Patch& p, std::size_t k) {
  cpath::Patch out(p.width() * k, p.height() * k);
  for (std::size_t y = 0; y < out.height(); ++y)
    for (std::size_t x = 0; x < out.width(); ++x)
      out.pixels()[y * out.width() + x] = p.pixels()[(y / k) * p.width() + x / k];
  return out;
}

inline cpath::Patch permute(const cpath::Patch& p, std::mt19937_64& rng) {
  std::vector<cpath::RgbPixel> px(p.pixels().begin(), p.pixels().end());
  std::shuffle(px.begin(), px.end(), rng);
  return cpath::Patch(p.width(), p.height(), std::move(px));
}

/// Two H&E-like classes: pixels iid N(mean_c, sigma^2) per channel. The
/// class means lie `separation` apart (Euclidean, RGB units) along a pinker
/// direction (+R, -G).
struct ChromaticShift {
  double separation = 30.0;
  double sigma = 15.0;
  std::size_t patches = 400;
  std::size_t side = 64;
  std::uint64_t seed = 2024;

  void class_mean(int c, double out[3]) const {
    const double base[3] = {170.0, 110.0, 160.0};
    const double step = c == 0 ? 0.0 : separation / std::sqrt(2.0);
    out[0] = base[0] + step;
    out[1] = base[1] - step;
    out[2] = base[2];
  }

  /// Writes <dir>/<class>/<index>.png and <dir>/manifest.csv; classes alternate.
  cpath::DatasetManifest write(const std::filesystem::path& dir) const {
    std::mt19937_64 rng(seed);
    cpath::DatasetManifest m;
    m.root = dir;
    for (const char* cls : {"shift_a", "shift_b"}) std::filesystem::create_directories(dir / cls);
    for (std::size_t i = 0; i < patches; ++i) {
      const int c = static_cast<int>(i % 2);
      double mean[3];
      class_mean(c, mean);
      const auto p = gaussian_patch(rng, side, mean, sigma);
      const std::string rel = std::string(c == 0 ? "shift_a" : "shift_b") + "/" + std::to_string(i) + ".png";
      cpath::write_png(p, dir / rel);
      m.records.push_back({rel, c == 0 ? "shift_a" : "shift_b", cpath::SplitTag::None});
    }
    cpath::save_manifest(m, dir / "manifest.csv");
    return m;
  }
};

/// Gaussian blobs in d dimensions; class c centered at c * gap on every axis.
inline cpath::TrainingSet blobs(std::mt19937_64& rng, std::size_t per_class, int classes, std::size_t d, double gap,
                                double sigma = 1.0) {
  std::normal_distribution<double> n(0.0, sigma);
  cpath::TrainingSet s;
  s.features = cpath::Matrix(per_class * classes, d);
  for (std::size_t i = 0; i < per_class * classes; ++i) {
    const int c = static_cast<int>(i % classes);
    for (std::size_t j = 0; j < d; ++j) s.features(i, j) = c * gap + n(rng);
    s.labels.push_back(c);
  }
  s.class_names = cpath::default_class_names(classes);
  return s;
}

/// Two axis-aligned rectangles in 2-D separated by a gap on x.
inline cpath::TrainingSet rectangles(std::mt19937_64& rng, std::size_t per_class) {
  std::uniform_real_distribution<double> ua(0.0, 4.0), ub(5.0, 9.0), uy(0.0, 3.0);
  cpath::TrainingSet s;
  s.features = cpath::Matrix(2 * per_class, 2);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int c = static_cast<int>(i % 2);
    s.features(i, 0) = c == 0 ? ua(rng) : ub(rng);
    s.features(i, 1) = uy(rng);
    s.labels.push_back(c);
  }
  s.class_names = cpath::default_class_names(2);
  return s;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("cpath_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace synth
