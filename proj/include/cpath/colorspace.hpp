#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cpath {

struct RgbPixel {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const RgbPixel&, const RgbPixel&) = default;
};

/// Hue is a fraction of the full circle in [0, 1); s and v lie in [0, 1].
/// Achromatic pixels (s == 0) carry h == 0.
struct HsvPixel {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

/// Decoded image: row-major RGB buffer of width * height pixels.
/// A default-constructed patch is empty; the extractors reject it.
class Patch {
 public:
  Patch() = default;
  Patch(std::size_t width, std::size_t height);
  Patch(std::size_t width, std::size_t height, std::vector<RgbPixel> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  std::span<const RgbPixel> pixels() const noexcept { return pixels_; }
  std::span<RgbPixel> pixels() noexcept { return pixels_; }

  const RgbPixel& at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  RgbPixel& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }

  friend bool operator==(const Patch&, const Patch&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<RgbPixel> pixels_;
};

/// Hexcone RGB -> HSV in double precision.
HsvPixel rgb_to_hsv(RgbPixel p) noexcept;

}  // namespace cpath
