#pragma once

// Dataset manifests: CSV with header `path,label[,split]`, UTF-8, LF line
// endings. Paths are relative to the manifest's directory unless absolute.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpath {

enum class SplitTag : std::uint8_t { None, Train, Test, Val };

std::string_view split_tag_name(SplitTag t) noexcept;
std::optional<SplitTag> parse_split_tag(std::string_view s);

struct ManifestRecord {
  std::string path;
  std::string label;
  SplitTag split = SplitTag::None;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestRecord> records;

  std::size_t size() const noexcept { return records.size(); }

  /// Sorted distinct labels; position = class index.
  std::vector<std::string> class_names() const;
  std::vector<int> label_indices() const;
  bool has_split_tags() const;
  std::filesystem::path resolve(const ManifestRecord& rec) const;

  /// Throws EmptyManifest, DuplicatePath or BadRecord.
  void validate() const;
};

DatasetManifest parse_manifest(std::string_view csv, const std::filesystem::path& root);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Always writes the split column when any record carries a tag.
std::string manifest_to_csv(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Manifest for a `root/<class>/<image>` layout (png, jpg, jpeg), sorted by
/// class then file name. Paths are relative to `root`.
DatasetManifest manifest_from_directory(const std::filesystem::path& root);

}  // namespace cpath
