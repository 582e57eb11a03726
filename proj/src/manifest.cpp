#include "cpath/manifest.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "cpath/binary_io.hpp"
#include "cpath/error.hpp"

namespace cpath {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view split_tag_name(SplitTag t) noexcept {
  switch (t) {
    case SplitTag::None: return "";
    case SplitTag::Train: return "train";
    case SplitTag::Test: return "test";
    case SplitTag::Val: return "val";
  }
  return "";
}

std::optional<SplitTag> parse_split_tag(std::string_view s) {
  if (s.empty()) return SplitTag::None;
  if (s == "train") return SplitTag::Train;
  if (s == "test") return SplitTag::Test;
  if (s == "val") return SplitTag::Val;
  return std::nullopt;
}

std::vector<std::string> DatasetManifest::class_names() const {
  std::set<std::string> names;
  for (const auto& r : records) names.insert(r.label);
  return {names.begin(), names.end()};
}

std::vector<int> DatasetManifest::label_indices() const {
  const auto names = class_names();
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(index.at(r.label));
  return out;
}

bool DatasetManifest::has_split_tags() const {
  return std::any_of(records.begin(), records.end(), [](const auto& r) { return r.split != SplitTag::None; });
}

fs::path DatasetManifest::resolve(const ManifestRecord& rec) const {
  const fs::path p(rec.path);
  return p.is_absolute() ? p : root / p;
}

void DatasetManifest::validate() const {
  if (records.empty()) throw Error(Errc::EmptyManifest, "manifest has no records");
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (r.path.empty()) throw Error(Errc::BadRecord, "record with empty path");
    if (r.label.empty()) throw Error(Errc::BadRecord, "record '" + r.path + "' has an empty label");
    if (!seen.insert(r.path).second) throw Error(Errc::DuplicatePath, "path listed twice: " + r.path);
  }
}

DatasetManifest parse_manifest(std::string_view csv, const fs::path& root) {
  if (csv.starts_with("\xEF\xBB\xBF")) csv.remove_prefix(3);
  DatasetManifest m;
  m.root = root;

  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  int path_col = -1, label_col = -1, split_col = -1;
  std::size_t width = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto fields = split_csv_line(body);
    if (!header_seen) {
      header_seen = true;
      width = fields.size();
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto name = lower(trim(fields[i]));
        if (name == "path") path_col = static_cast<int>(i);
        else if (name == "label") label_col = static_cast<int>(i);
        else if (name == "split") split_col = static_cast<int>(i);
      }
      if (path_col < 0) throw Error(Errc::MissingColumn, "manifest header lacks a 'path' column");
      if (label_col < 0) throw Error(Errc::MissingColumn, "manifest header lacks a 'label' column");
      continue;
    }
    if (fields.size() != width)
      throw Error(Errc::BadRecord, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                       " fields, header has " + std::to_string(width));
    ManifestRecord rec;
    rec.path = std::string(trim(fields[path_col]));
    rec.label = std::string(trim(fields[label_col]));
    if (split_col >= 0) {
      const auto tag = parse_split_tag(lower(trim(fields[split_col])));
      if (!tag) throw Error(Errc::BadRecord, "line " + std::to_string(line_no) + ": unknown split '" +
                                                 std::string(trim(fields[split_col])) + "'");
      rec.split = *tag;
    }
    m.records.push_back(std::move(rec));
  }
  if (!header_seen) throw Error(Errc::MissingColumn, "manifest has no header line");
  m.validate();
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  const auto text = io::read_file(path.string());
  auto root = path.parent_path();
  if (root.empty()) root = ".";
  return parse_manifest(text, root);
}

std::string manifest_to_csv(const DatasetManifest& manifest) {
  const bool with_split = manifest.has_split_tags();
  std::string out = with_split ? "path,label,split\n" : "path,label\n";
  for (const auto& r : manifest.records) {
    out += r.path;
    out += ',';
    out += r.label;
    if (with_split) {
      out += ',';
      out += split_tag_name(r.split);
    }
    out += '\n';
  }
  return out;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  io::write_file(path.string(), manifest_to_csv(manifest));
}

DatasetManifest manifest_from_directory(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(Errc::Io, "not a directory: " + root.string());
  DatasetManifest m;
  m.root = root;
  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) class_dirs.push_back(e.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  for (const auto& dir : class_dirs) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      const auto ext = lower(e.path().extension().string());
      if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    const auto label = dir.filename().string();
    for (const auto& f : files) m.records.push_back({fs::relative(f, root).generic_string(), label, SplitTag::None});
  }
  m.validate();
  return m;
}

}  // namespace cpath
