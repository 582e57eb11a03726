#pragma once

// Global color descriptors. Every extractor treats a patch as an unordered
// pixel multiset: outputs are bit-identical under any permutation of the pixel
// buffer and under k-fold pixel replication.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cpath/colorspace.hpp"
#include "cpath/matrix.hpp"

namespace cpath {

inline constexpr int kDefaultBins = 16;
inline constexpr int kMaxBins = 256;
inline constexpr std::size_t kMomentsDim = 9;

/// Numeric values double as the feature-cache tag byte.
enum class Extractor : std::uint8_t { Moments = 1, RgbHist = 2, HsvHist = 3 };

enum class ColorSpaceTag : std::uint8_t { Rgb, Hsv };

std::string_view extractor_name(Extractor e) noexcept;
Extractor parse_extractor(std::string_view name);

constexpr std::size_t histogram_dim(int bins) noexcept { return 3 * static_cast<std::size_t>(bins) + 6; }
std::size_t feature_dim(Extractor e, int bins);

/// [mean, stddev, skew] per channel, channels in R, G, B order. Intensity units.
struct ColorMoments {
  std::array<double, kMomentsDim> values{};
};

/// [hist(c0), hist(c1), hist(c2), mean0, std0, mean1, std1, mean2, std2].
struct HistogramFeatures {
  ColorSpaceTag space = ColorSpaceTag::Rgb;
  int bins = kDefaultBins;
  std::vector<double> values;

  std::span<const double> block(int channel) const {
    return std::span<const double>(values).subspan(static_cast<std::size_t>(channel * bins), bins);
  }
};

struct FeatureVector {
  Extractor tag = Extractor::Moments;
  std::vector<double> values;
};

/// Real cube root that keeps the sign of x.
double signed_cbrt(double x) noexcept;

/// floor(bins * (x - lo) / (hi - lo)) with x == hi folded into the last bin.
/// Throws OutOfRange for x outside [lo, hi].
int bin_index(double x, double lo, double hi, int bins);

ColorMoments extract_color_moments(const Patch& patch);
HistogramFeatures extract_rgb_histogram(const Patch& patch, int bins = kDefaultBins);
HistogramFeatures extract_hsv_histogram(const Patch& patch, int bins = kDefaultBins);

FeatureVector extract(const Patch& patch, Extractor method, int bins = kDefaultBins);

/// Feature rows for many patches, one row per patch in input order.
/// Parallel over patches with OpenMP; output does not depend on the thread count.
Matrix extract_batch(std::span<const Patch> patches, Extractor method, int bins = kDefaultBins);

namespace serial {
/// Single-threaded reference for extract_batch.
Matrix extract_batch(std::span<const Patch> patches, Extractor method, int bins = kDefaultBins);
}  // namespace serial

}  // namespace cpath
