#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cpath/colorspace.hpp"

namespace cpath {

/// PNG or JPEG (8-bit; 16-bit PNG samples are reduced to 8 bits). Grayscale
/// is replicated into three channels and alpha is discarded without
/// compositing. Throws UnsupportedFormat or CorruptImage.
Patch decode_patch(std::string_view bytes, std::string_view source = "<memory>");
Patch decode_patch_file(const std::filesystem::path& path);

/// Lossless 8-bit RGB PNG.
std::string encode_png(const Patch& patch);
void write_png(const Patch& patch, const std::filesystem::path& path);

/// Baseline JPEG, mostly for producing test fixtures.
std::string encode_jpeg(const Patch& patch, int quality = 95);

}  // namespace cpath
