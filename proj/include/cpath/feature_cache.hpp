#pragma once

// Binary feature cache, little-endian:
//   "CFC1" | u16 version | u8 tag (1 moments, 2 rgb-hist, 3 hsv-hist)
//   u16 bins (0 for moments) | u32 d | u64 n
//   n x (u32 label | d x f64)
// Rows follow manifest order; labels index the manifest's sorted class names.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cpath/dataset.hpp"
#include "cpath/features.hpp"
#include "cpath/manifest.hpp"
#include "cpath/matrix.hpp"

namespace cpath {

inline constexpr std::string_view kCacheMagic = "CFC1";
inline constexpr std::uint16_t kCacheVersion = 1;

struct FeatureCache {
  Extractor tag = Extractor::Moments;
  int bins = 0;
  Matrix features;
  std::vector<std::uint32_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  friend bool operator==(const FeatureCache&, const FeatureCache&) = default;
};

/// Decodes every record and extracts features, parallel over records.
/// Throws EmptyManifest for an empty manifest; a decode failure is rethrown
/// with the offending path.
FeatureCache compute_cache(const DatasetManifest& manifest, Extractor tag, int bins = kDefaultBins);

namespace serial {
FeatureCache compute_cache(const DatasetManifest& manifest, Extractor tag, int bins = kDefaultBins);
}  // namespace serial

std::string serialize_cache(const FeatureCache& cache);

/// Throws BadMagic, BadVersion or CorruptFile.
FeatureCache deserialize_cache(std::string_view bytes);

/// compute_cache followed by an atomic write (temp file + rename).
FeatureCache build_cache(const DatasetManifest& manifest, Extractor tag, int bins, const std::filesystem::path& path);

/// Cache rows as a training set; class_names must cover every stored label.
TrainingSet to_training_set(const FeatureCache& cache, std::vector<std::string> class_names);

FeatureCache read_cache(const std::filesystem::path& path);
void write_cache(const FeatureCache& cache, const std::filesystem::path& path);

}  // namespace cpath
