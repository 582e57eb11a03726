#pragma once

// Import of the MedMNIST PathMNIST archive (pathmnist.npz) into PNG patches
// plus a manifest with official train/val/test tags.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cpath/manifest.hpp"

namespace cpath {

/// A decoded .npy array of unsigned bytes or integers, flattened C-order.
struct NpyArray {
  std::vector<std::size_t> shape;
  std::vector<std::int64_t> values;

  std::size_t count() const noexcept;
};

/// Parses .npy bytes with dtype u1, i1, u2, i2, u4, i4, u8 or i8 (either
/// byte order) in C order. Throws CorruptFile or UnsupportedFormat.
NpyArray parse_npy(std::string_view bytes);

/// Every member of a .npz (zip) archive, keyed by name without ".npy".
/// Handles stored and deflated members and ZIP64 size fields.
std::map<std::string, std::string> read_npz_members(std::string_view archive);

struct PathMnistImport {
  std::size_t max_per_split = 0;  // 0: all
};

/// Writes <out>/images/<split>/<index>.png and <out>/manifest.csv.
/// Labels are the tissue names from pathmnist_class_names().
DatasetManifest import_pathmnist(const std::filesystem::path& npz, const std::filesystem::path& out_dir,
                                 const PathMnistImport& options = {});

}  // namespace cpath
