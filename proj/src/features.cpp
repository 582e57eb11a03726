#include "cpath/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cpath/error.hpp"

namespace cpath {

namespace {

__extension__ typedef __int128 i128;
__extension__ typedef unsigned __int128 u128;

// Above this pixel count the exact central moments would overflow 128 bits.
constexpr std::uint64_t kExactMomentLimit = std::uint64_t{1} << 24;

using LevelCounts = std::array<std::uint64_t, 256>;

struct ChannelStats {
  double mean = 0.0;
  double stddev = 0.0;
  double skew = 0.0;
};

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    const u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// num / den rounded from the reduced fraction, so equal rationals give equal doubles.
double ratio(i128 num, u128 den) {
  if (num == 0) return 0.0;
  const bool neg = num < 0;
  u128 mag = neg ? static_cast<u128>(-num) : static_cast<u128>(num);
  const u128 g = gcd128(mag, den);
  mag /= g;
  den /= g;
  const double q = static_cast<double>(mag) / static_cast<double>(den);
  return neg ? -q : q;
}

ChannelStats level_moments(const LevelCounts& counts, std::uint64_t n) {
  std::uint64_t sum = 0;
  for (int v = 0; v < 256; ++v) sum += static_cast<std::uint64_t>(v) * counts[v];

  ChannelStats st;
  st.mean = static_cast<double>(sum) / static_cast<double>(n);

  if (n <= kExactMomentLimit) {
    // Deviations scaled by n are integers: e_v = v*n - sum.
    i128 m2 = 0, m3 = 0;
    for (int v = 0; v < 256; ++v) {
      if (counts[v] == 0) continue;
      const i128 e = static_cast<i128>(v) * n - static_cast<i128>(sum);
      const i128 c = counts[v];
      m2 += c * e * e;
      m3 += c * e * e * e;
    }
    const u128 n3 = static_cast<u128>(n) * n * n;
    st.stddev = std::sqrt(ratio(m2, n3));
    st.skew = signed_cbrt(ratio(m3, n3 * n));
  } else {
    double m2 = 0.0, m3 = 0.0;
    for (int v = 0; v < 256; ++v) {
      if (counts[v] == 0) continue;
      const double p = static_cast<double>(counts[v]) / static_cast<double>(n);
      const double d = v - st.mean;
      m2 += p * d * d;
      m3 += p * d * d * d;
    }
    st.stddev = std::sqrt(m2);
    st.skew = signed_cbrt(m3);
  }
  return st;
}

std::array<LevelCounts, 3> channel_level_counts(const Patch& patch) {
  std::array<LevelCounts, 3> counts{};
  for (const auto& px : patch.pixels()) {
    ++counts[0][px.r];
    ++counts[1][px.g];
    ++counts[2][px.b];
  }
  return counts;
}

void require_pixels(const Patch& patch) {
  if (patch.empty()) throw Error(Errc::EmptyPatch, "patch has no pixels");
}

void require_bins(int bins) {
  if (bins < 1 || bins > kMaxBins)
    throw Error(Errc::InvalidArgument, "bin count must be in [1, 256], got " + std::to_string(bins));
}

}  // namespace

std::string_view extractor_name(Extractor e) noexcept {
  switch (e) {
    case Extractor::Moments: return "moments";
    case Extractor::RgbHist: return "rgb-hist";
    case Extractor::HsvHist: return "hsv-hist";
  }
  return "unknown";
}

Extractor parse_extractor(std::string_view name) {
  if (name == "moments") return Extractor::Moments;
  if (name == "rgb-hist") return Extractor::RgbHist;
  if (name == "hsv-hist") return Extractor::HsvHist;
  throw Error(Errc::InvalidArgument, "unknown feature method '" + std::string(name) + "'");
}

std::size_t feature_dim(Extractor e, int bins) {
  if (e == Extractor::Moments) return kMomentsDim;
  require_bins(bins);
  return histogram_dim(bins);
}

double signed_cbrt(double x) noexcept {
  return x < 0.0 ? -std::cbrt(-x) : std::cbrt(x);
}

int bin_index(double x, double lo, double hi, int bins) {
  if (!(lo < hi) || bins < 1) throw Error(Errc::InvalidArgument, "bin_index needs lo < hi and bins >= 1");
  if (!(x >= lo && x <= hi))
    throw Error(Errc::OutOfRange, "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                      std::to_string(hi) + "]");
  const auto k = static_cast<int>(std::floor(bins * (x - lo) / (hi - lo)));
  return std::min(k, bins - 1);
}

ColorMoments extract_color_moments(const Patch& patch) {
  require_pixels(patch);
  const auto counts = channel_level_counts(patch);
  ColorMoments out;
  for (int c = 0; c < 3; ++c) {
    const auto st = level_moments(counts[c], patch.pixel_count());
    out.values[3 * c + 0] = st.mean;
    out.values[3 * c + 1] = st.stddev;
    out.values[3 * c + 2] = st.skew;
  }
  return out;
}

HistogramFeatures extract_rgb_histogram(const Patch& patch, int bins) {
  require_pixels(patch);
  require_bins(bins);
  const auto counts = channel_level_counts(patch);
  const std::uint64_t n = patch.pixel_count();
  const auto nb = static_cast<std::size_t>(bins);

  std::array<int, 256> level_bin{};
  for (int v = 0; v < 256; ++v) level_bin[v] = bin_index(v, 0.0, 256.0, bins);

  HistogramFeatures out;
  out.space = ColorSpaceTag::Rgb;
  out.bins = bins;
  out.values.assign(histogram_dim(bins), 0.0);
  for (int c = 0; c < 3; ++c) {
    std::vector<std::uint64_t> hist(nb, 0);
    for (int v = 0; v < 256; ++v) hist[level_bin[v]] += counts[c][v];
    for (std::size_t k = 0; k < nb; ++k)
      out.values[c * nb + k] = static_cast<double>(hist[k]) / static_cast<double>(n);

    const auto st = level_moments(counts[c], n);
    out.values[3 * nb + 2 * c] = st.mean;
    out.values[3 * nb + 2 * c + 1] = st.stddev;
  }
  return out;
}

HistogramFeatures extract_hsv_histogram(const Patch& patch, int bins) {
  require_pixels(patch);
  require_bins(bins);
  const std::uint64_t n = patch.pixel_count();
  const auto nb = static_cast<std::size_t>(bins);

  // Collapse the multiset to (color, count) in packed-color order; all sums
  // below then run in that canonical order.
  std::vector<std::uint32_t> keys;
  keys.reserve(n);
  for (const auto& px : patch.pixels())
    keys.push_back((std::uint32_t{px.r} << 16) | (std::uint32_t{px.g} << 8) | px.b);
  std::sort(keys.begin(), keys.end());

  struct Weighted {
    HsvPixel hsv;
    std::uint64_t count;
  };
  std::vector<Weighted> colors;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    const RgbPixel px{static_cast<std::uint8_t>(keys[i] >> 16), static_cast<std::uint8_t>((keys[i] >> 8) & 0xFF),
                      static_cast<std::uint8_t>(keys[i] & 0xFF)};
    colors.push_back({rgb_to_hsv(px), j - i});
    i = j;
  }

  std::array<std::vector<std::uint64_t>, 3> hist;
  for (auto& h : hist) h.assign(nb, 0);
  std::array<double, 3> mean{};
  for (const auto& w : colors) {
    const std::array<double, 3> x{w.hsv.h, w.hsv.s, w.hsv.v};
    const double p = static_cast<double>(w.count) / static_cast<double>(n);
    for (int c = 0; c < 3; ++c) {
      hist[c][bin_index(x[c], 0.0, 1.0, bins)] += w.count;
      mean[c] += p * x[c];
    }
  }
  std::array<double, 3> var{};
  for (const auto& w : colors) {
    const std::array<double, 3> x{w.hsv.h, w.hsv.s, w.hsv.v};
    const double p = static_cast<double>(w.count) / static_cast<double>(n);
    for (int c = 0; c < 3; ++c) {
      const double d = x[c] - mean[c];
      var[c] += p * d * d;
    }
  }

  HistogramFeatures out;
  out.space = ColorSpaceTag::Hsv;
  out.bins = bins;
  out.values.assign(histogram_dim(bins), 0.0);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < nb; ++k)
      out.values[c * nb + k] = static_cast<double>(hist[c][k]) / static_cast<double>(n);
    out.values[3 * nb + 2 * c] = mean[c];
    out.values[3 * nb + 2 * c + 1] = std::sqrt(var[c]);
  }
  return out;
}

FeatureVector extract(const Patch& patch, Extractor method, int bins) {
  switch (method) {
    case Extractor::Moments: {
      const auto m = extract_color_moments(patch);
      return {method, std::vector<double>(m.values.begin(), m.values.end())};
    }
    case Extractor::RgbHist: return {method, extract_rgb_histogram(patch, bins).values};
    case Extractor::HsvHist: return {method, extract_hsv_histogram(patch, bins).values};
  }
  throw Error(Errc::InvalidArgument, "unknown extractor");
}

namespace serial {

Matrix extract_batch(std::span<const Patch> patches, Extractor method, int bins) {
  Matrix out(patches.size(), feature_dim(method, bins));
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto fv = extract(patches[i], method, bins);
    std::copy(fv.values.begin(), fv.values.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace serial

Matrix extract_batch(std::span<const Patch> patches, Extractor method, int bins) {
  Matrix out(patches.size(), feature_dim(method, bins));
  const auto n = static_cast<std::ptrdiff_t>(patches.size());
  std::vector<std::string> errors(patches.size());
  bool failed = false;

#pragma omp parallel for schedule(dynamic, 4) reduction(|| : failed)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto fv = extract(patches[i], method, bins);
      std::copy(fv.values.begin(), fv.values.end(), out.row(i).begin());
    } catch (const std::exception& e) {
      errors[i] = e.what();
      failed = true;
    }
  }

  if (failed) {
    // Re-run the first failing patch serially to rethrow with its original type.
    for (std::size_t i = 0; i < patches.size(); ++i)
      if (!errors[i].empty()) (void)extract(patches[i], method, bins);
  }
  return out;
}

}  // namespace cpath
