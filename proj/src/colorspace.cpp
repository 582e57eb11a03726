#include "cpath/colorspace.hpp"

#include <algorithm>
#include <string>

#include "cpath/error.hpp"

namespace cpath {

Patch::Patch(std::size_t width, std::size_t height)
    : width_(width), height_(height), pixels_(width * height) {}

Patch::Patch(std::size_t width, std::size_t height, std::vector<RgbPixel> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != width_ * height_)
    throw Error(Errc::InvalidArgument, "patch buffer holds " + std::to_string(pixels_.size()) +
                                           " pixels, expected " + std::to_string(width_ * height_));
}

HsvPixel rgb_to_hsv(RgbPixel p) noexcept {
  const int r = p.r, g = p.g, b = p.b;
  const int hi = std::max({r, g, b});
  const int lo = std::min({r, g, b});
  const int delta = hi - lo;

  HsvPixel out;
  out.v = hi / 255.0;
  if (hi == 0 || delta == 0) return out;  // black or gray: s = 0, h = 0
  out.s = static_cast<double>(delta) / hi;

  // Sector offsets in sixths of the circle; ties resolve to r, then g.
  double sector;
  if (hi == r)
    sector = static_cast<double>(g - b) / delta;
  else if (hi == g)
    sector = static_cast<double>(b - r) / delta + 2.0;
  else
    sector = static_cast<double>(r - g) / delta + 4.0;

  double h = sector / 6.0;
  if (h < 0.0) h += 1.0;
  if (h >= 1.0) h -= 1.0;
  out.h = h;
  return out;
}

}  // namespace cpath
