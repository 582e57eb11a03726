#pragma once

// Brute-force reference implementations used by the tests. They share no code
// with the library: conversions, sums and counts are written out from the
// definitions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "cpath/colorspace.hpp"
#include "cpath/matrix.hpp"

namespace oracle {

/// Hexcone HSV in degrees, rescaled to [0, 1).
inline void hsv_degrees(int r, int g, int b, long double& h, long double& s, long double& v) {
  const long double R = r / 255.0L, G = g / 255.0L, B = b / 255.0L;
  const long double mx = std::max({R, G, B}), mn = std::min({R, G, B}), c = mx - mn;
  v = mx;
  s = mx == 0 ? 0 : c / mx;
  long double deg = 0;
  if (c != 0) {
    if (mx == R) deg = 60.0L * std::fmod((G - B) / c + 6.0L, 6.0L);
    else if (mx == G) deg = 60.0L * ((B - R) / c + 2.0L);
    else deg = 60.0L * ((R - G) / c + 4.0L);
  }
  h = deg / 360.0L;
  if (h >= 1) h -= 1;
}

/// Histogram bins of the HSV channels from exact integer arithmetic:
/// h = n / (6 * delta), s = delta / max, v = max / 255.
inline void hsv_bins(int r, int g, int b, int bins, int& hb, int& sb, int& vb) {
  const int mx = std::max({r, g, b}), mn = std::min({r, g, b}), delta = mx - mn;
  long n = 0;
  if (delta != 0) {
    if (mx == r) n = (g - b) < 0 ? (g - b) + 6L * delta : (g - b);
    else if (mx == g) n = (b - r) + 2L * delta;
    else n = (r - g) + 4L * delta;
  }
  hb = delta == 0 ? 0 : static_cast<int>(bins * n / (6L * delta));
  sb = mx == 0 ? 0 : std::min(bins - 1, static_cast<int>(static_cast<long>(bins) * delta / mx));
  vb = std::min(bins - 1, static_cast<int>(static_cast<long>(bins) * mx / 255));
}

inline int channel(const cpath::RgbPixel& p, int c) { return c == 0 ? p.r : c == 1 ? p.g : p.b; }

inline double cube_root_signed(long double x) {
  return static_cast<double>(x < 0 ? -std::cbrt(-x) : std::cbrt(x));
}

/// Two passes straight from the definitions: mean, then population second and
/// third central moments. Central sums are exact in 128-bit integers of N * x - S.
inline std::vector<double> moments(const cpath::Patch& p) {
  std::vector<double> out;
  const auto px = p.pixels();
  const long double n = static_cast<long double>(px.size());
  for (int c = 0; c < 3; ++c) {
    __int128 s = 0;
    for (const auto& q : px) s += channel(q, c);
    __int128 m2 = 0, m3 = 0;
    for (const auto& q : px) {
      const __int128 d = static_cast<__int128>(px.size()) * channel(q, c) - s;
      m2 += d * d;
      m3 += d * d * d;
    }
    const long double mean = static_cast<long double>(s) / n;
    const long double var = static_cast<long double>(m2) / (n * n * n);
    const long double third = static_cast<long double>(m3) / (n * n * n * n);
    out.push_back(static_cast<double>(mean));
    out.push_back(static_cast<double>(std::sqrt(var)));
    out.push_back(cube_root_signed(third));
  }
  return out;
}

/// Sort the values, then count each bin by scanning.
inline std::vector<double> count_sorted(std::vector<int> bins_of_pixels, int bins) {
  std::sort(bins_of_pixels.begin(), bins_of_pixels.end());
  std::vector<double> out(bins, 0.0);
  std::size_t i = 0;
  for (int k = 0; k < bins; ++k) {
    std::size_t c = 0;
    while (i < bins_of_pixels.size() && bins_of_pixels[i] == k) {
      ++c;
      ++i;
    }
    out[k] = static_cast<double>(c) / static_cast<double>(bins_of_pixels.size());
  }
  return out;
}

template <typename T>
inline void mean_std(const std::vector<T>& xs, double& mean, double& sd) {
  long double s = 0;
  for (auto x : xs) s += x;
  const long double m = s / xs.size();
  long double ss = 0;
  for (auto x : xs) ss += (x - m) * (x - m);
  mean = static_cast<double>(m);
  sd = static_cast<double>(std::sqrt(ss / xs.size()));
}

inline std::vector<double> rgb_histogram(const cpath::Patch& p, int bins) {
  std::vector<double> out;
  const auto px = p.pixels();
  for (int c = 0; c < 3; ++c) {
    std::vector<int> idx;
    for (const auto& q : px) idx.push_back(channel(q, c) * bins / 256);
    const auto h = count_sorted(idx, bins);
    out.insert(out.end(), h.begin(), h.end());
  }
  for (int c = 0; c < 3; ++c) {
    std::vector<int> v;
    for (const auto& q : px) v.push_back(channel(q, c));
    double m, sd;
    mean_std(v, m, sd);
    out.push_back(m);
    out.push_back(sd);
  }
  return out;
}

inline std::vector<double> hsv_histogram(const cpath::Patch& p, int bins) {
  const auto px = p.pixels();
  std::vector<int> hb, sb, vb;
  std::vector<long double> hs, ss, vs;
  for (const auto& q : px) {
    int a, b, c;
    hsv_bins(q.r, q.g, q.b, bins, a, b, c);
    hb.push_back(a);
    sb.push_back(b);
    vb.push_back(c);
    long double h, s, v;
    hsv_degrees(q.r, q.g, q.b, h, s, v);
    hs.push_back(h);
    ss.push_back(s);
    vs.push_back(v);
  }
  std::vector<double> out;
  for (const auto* idx : {&hb, &sb, &vb}) {
    const auto h = count_sorted(*idx, bins);
    out.insert(out.end(), h.begin(), h.end());
  }
  for (const auto* xs : {&hs, &ss, &vs}) {
    double m, sd;
    mean_std(*xs, m, sd);
    out.push_back(m);
    out.push_back(sd);
  }
  return out;
}

/// Column means and population deviations in the textbook two-pass order,
/// scale floored to 1; returns the standardized copy of `x` for both sets.
struct Scaler {
  std::vector<double> mean, scale;
  explicit Scaler(const cpath::Matrix& rows) {
    const std::size_t n = rows.rows(), d = rows.cols();
    mean.assign(d, 0.0);
    scale.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) mean[j] += rows(i, j);
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) scale[j] += (rows(i, j) - mean[j]) * (rows(i, j) - mean[j]);
    for (auto& s : scale) {
      s = std::sqrt(s / static_cast<double>(n));
      if (!(s >= 1e-12)) s = 1.0;
    }
  }
  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
    return out;
  }
};

/// Exhaustive KNN: all distances, full sort by (distance, row), vote with
/// ties to the smallest class.
inline int knn(const cpath::Matrix& train, const std::vector<int>& labels, int num_classes, int k,
               std::span<const double> query) {
  const Scaler sc(train);
  const auto q = sc.apply(query);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const auto r = sc.apply(train.row(i));
    double d = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) d += (r[j] - q[j]) * (r[j] - q[j]);
    dist.emplace_back(d, i);
  }
  std::sort(dist.begin(), dist.end());
  std::vector<int> votes(num_classes, 0);
  const auto kk = std::min<std::size_t>(k, dist.size());
  for (std::size_t i = 0; i < kk; ++i) ++votes[labels[dist[i].second]];
  int best = 0;
  for (int c = 1; c < num_classes; ++c)
    if (votes[c] > votes[best]) best = c;
  return best;
}

inline std::vector<std::uint64_t> confusion_counts(const std::vector<int>& t, const std::vector<int>& p, int c) {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(c) * c, 0);
  for (int a = 0; a < c; ++a)
    for (int b = 0; b < c; ++b)
      for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] == a && p[i] == b) ++out[static_cast<std::size_t>(a) * c + b];
  return out;
}

}  // namespace oracle
