#include "cpath/feature_cache.hpp"

#include <optional>

#include "cpath/binary_io.hpp"
#include "cpath/error.hpp"
#include "cpath/image_io.hpp"

namespace cpath {

namespace fs = std::filesystem;

namespace {

int stored_bins(Extractor tag, int bins) { return tag == Extractor::Moments ? 0 : bins; }

FeatureCache prepare(const DatasetManifest& manifest, Extractor tag, int bins) {
  if (manifest.records.empty()) throw Error(Errc::EmptyManifest, "manifest has no records");
  if (tag != Extractor::Moments && (bins < 1 || bins > kMaxBins))
    throw Error(Errc::InvalidArgument, "bins must lie in [1, " + std::to_string(kMaxBins) + "]");
  FeatureCache cache;
  cache.tag = tag;
  cache.bins = stored_bins(tag, bins);
  cache.features = Matrix(manifest.size(), feature_dim(tag, bins));
  const auto labels = manifest.label_indices();
  cache.labels.assign(labels.begin(), labels.end());
  return cache;
}

void fill_row(const DatasetManifest& manifest, std::size_t i, Extractor tag, int bins, FeatureCache& cache) {
  const auto& rec = manifest.records[i];
  const auto patch = decode_patch_file(manifest.resolve(rec));
  const auto fv = extract(patch, tag, bins);
  std::copy(fv.values.begin(), fv.values.end(), cache.features.row(i).begin());
}

[[noreturn]] void rethrow_with_path(const DatasetManifest& manifest, std::size_t i, const Error& e) {
  const auto path = manifest.records[i].path;
  if (e.detail().find(path) != std::string::npos) throw e;
  throw Error(e.code(), path + ": " + e.detail());
}

}  // namespace

FeatureCache compute_cache(const DatasetManifest& manifest, Extractor tag, int bins) {
  auto cache = prepare(manifest, tag, bins);
  const auto n = static_cast<std::ptrdiff_t>(manifest.size());
  std::vector<std::optional<Error>> errors(manifest.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      fill_row(manifest, static_cast<std::size_t>(i), tag, bins, cache);
    } catch (const Error& e) {
      errors[i] = e;
    } catch (const std::exception& e) {
      errors[i] = Error(Errc::Io, e.what());
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (errors[i]) rethrow_with_path(manifest, i, *errors[i]);
  return cache;
}

FeatureCache serial::compute_cache(const DatasetManifest& manifest, Extractor tag, int bins) {
  auto cache = prepare(manifest, tag, bins);
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    try {
      fill_row(manifest, i, tag, bins, cache);
    } catch (const Error& e) {
      rethrow_with_path(manifest, i, e);
    }
  }
  return cache;
}

std::string serialize_cache(const FeatureCache& cache) {
  const auto d = cache.features.cols();
  if (cache.features.rows() != cache.labels.size())
    throw Error(Errc::DimensionMismatch, "feature rows and labels differ in count");
  io::ByteWriter w;
  w.bytes(kCacheMagic);
  w.u16(kCacheVersion);
  w.u8(static_cast<std::uint8_t>(cache.tag));
  w.u16(static_cast<std::uint16_t>(cache.bins));
  w.u32(static_cast<std::uint32_t>(d));
  w.u64(cache.labels.size());
  for (std::size_t i = 0; i < cache.labels.size(); ++i) {
    w.u32(cache.labels[i]);
    for (double v : cache.features.row(i)) w.f64(v);
  }
  return w.take();
}

FeatureCache deserialize_cache(std::string_view bytes) {
  io::ByteReader r(bytes, "feature cache");
  if (bytes.size() < kCacheMagic.size() || r.bytes(kCacheMagic.size()) != kCacheMagic)
    throw Error(Errc::BadMagic, "not a feature cache (expected \"CFC1\")");
  const auto version = r.u16();
  if (version != kCacheVersion) throw Error(Errc::BadVersion, "unsupported cache version " + std::to_string(version));
  FeatureCache cache;
  const auto tag = r.u8();
  if (tag < 1 || tag > 3) throw Error(Errc::CorruptFile, "unknown extractor tag " + std::to_string(tag));
  cache.tag = static_cast<Extractor>(tag);
  cache.bins = r.u16();
  const auto d = r.u32();
  const auto n = r.u64();
  const int effective_bins = cache.tag == Extractor::Moments ? kDefaultBins : cache.bins;
  if (cache.tag != Extractor::Moments && (cache.bins < 1 || cache.bins > kMaxBins))
    throw Error(Errc::CorruptFile, "bin count out of range");
  if (d != feature_dim(cache.tag, effective_bins)) throw Error(Errc::CorruptFile, "dimension does not match extractor");
  r.expect_at_least(n, 4 + 8 * static_cast<std::uint64_t>(d));
  cache.features = Matrix(n, d);
  cache.labels.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    cache.labels[i] = r.u32();
    for (auto& v : cache.features.row(i)) v = r.f64();
  }
  if (!r.at_end()) throw Error(Errc::CorruptFile, "trailing bytes after feature rows");
  return cache;
}

void write_cache(const FeatureCache& cache, const fs::path& path) {
  const auto tmp = fs::path(path.string() + ".tmp");
  io::write_file(tmp.string(), serialize_cache(cache));
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "cannot move cache into place at " + path.string() + ": " + ec.message());
}

FeatureCache build_cache(const DatasetManifest& manifest, Extractor tag, int bins, const fs::path& path) {
  auto cache = compute_cache(manifest, tag, bins);
  write_cache(cache, path);
  return cache;
}

TrainingSet to_training_set(const FeatureCache& cache, std::vector<std::string> class_names) {
  TrainingSet set;
  set.features = cache.features;
  set.labels.assign(cache.labels.begin(), cache.labels.end());
  set.class_names = std::move(class_names);
  set.validate();
  return set;
}

FeatureCache read_cache(const fs::path& path) { return deserialize_cache(io::read_file(path.string())); }

}  // namespace cpath
