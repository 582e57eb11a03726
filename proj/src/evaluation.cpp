#include "cpath/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpath/error.hpp"
#include "cpath/rng.hpp"

namespace cpath {

std::uint64_t ConfusionMatrix::support(int truth) const {
  std::uint64_t s = 0;
  for (int p = 0; p < num_classes; ++p) s += at(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int num_classes) {
  if (truth.size() != predicted.size())
    throw Error(Errc::DimensionMismatch, "truth and prediction lists differ in length");
  if (num_classes < 1) throw Error(Errc::InvalidArgument, "confusion matrix needs at least one class");
  ConfusionMatrix cm;
  cm.num_classes = num_classes;
  cm.counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 || predicted[i] >= num_classes)
      throw Error(Errc::InvalidArgument, "label outside [0, " + std::to_string(num_classes) + ")");
    ++cm.counts[static_cast<std::size_t>(truth[i]) * num_classes + predicted[i]];
  }
  return cm;
}

std::vector<double> per_class_recall(const ConfusionMatrix& cm) {
  std::vector<double> recall;
  for (int c = 0; c < cm.num_classes; ++c) {
    const auto s = cm.support(c);
    if (s == 0) throw Error(Errc::ZeroSupportClass, "class " + std::to_string(c) + " has no test samples");
    recall.push_back(static_cast<double>(cm.at(c, c)) / static_cast<double>(s));
  }
  return recall;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
  const auto recall = per_class_recall(cm);
  if (recall.empty()) throw Error(Errc::ZeroSupportClass, "confusion matrix without classes");
  double s = 0.0;
  for (double r : recall) s += r;
  return s / static_cast<double>(recall.size());
}

double accuracy(const ConfusionMatrix& cm) {
  std::uint64_t hit = 0;
  for (int c = 0; c < cm.num_classes; ++c) hit += cm.at(c, c);
  const auto n = cm.total();
  if (n == 0) throw Error(Errc::EmptySet, "empty confusion matrix");
  return static_cast<double>(hit) / static_cast<double>(n);
}

const std::vector<std::string>& pathmnist_class_names() {
  static const std::vector<std::string> names{
      "Adipose", "Background", "Debris", "Lymphocytes", "Mucus", "Smooth Muscle",
      "Normal Colon Mucosa", "Cancer-Associated Stroma", "CRC Epithelium",
  };
  return names;
}

LabelMapping pathmnist_binary_mapping() {
  return {
      {"Adipose", "Normal"},
      {"Background", "Normal"},
      {"Mucus", "Normal"},
      {"Smooth Muscle", "Normal"},
      {"Normal Colon Mucosa", "Normal"},
      {"Debris", "Abnormal"},
      {"Lymphocytes", "Abnormal"},
      {"Cancer-Associated Stroma", "Abnormal"},
      {"CRC Epithelium", "Abnormal"},
  };
}

DatasetManifest map_binary_labels(const DatasetManifest& manifest, const LabelMapping& mapping) {
  DatasetManifest out = manifest;
  for (auto& r : out.records) {
    const auto it = mapping.find(r.label);
    if (it == mapping.end()) throw Error(Errc::UnmappedLabel, "no mapping for label '" + r.label + "'");
    r.label = it->second;
  }
  return out;
}

SplitIndices stratified_split_indices(std::span<const int> labels, int num_classes, double train_fraction,
                                      std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(Errc::InvalidArgument, "train fraction must lie in (0, 1)");
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw Error(Errc::InvalidArgument, "label outside class range");
    members[labels[i]].push_back(i);
  }

  SplitIndices out;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    if (m.empty()) continue;
    if (m.size() < 2)
      throw Error(Errc::TinyClass, "class " + std::to_string(c) + " has a single sample; cannot split");
    const auto n = static_cast<long>(m.size());
    const long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
    Rng rng(derive_seed(seed, c));
    shuffle(m.begin(), m.end(), rng);
    out.train.insert(out.train.end(), m.begin(), m.begin() + n_train);
    out.test.insert(out.test.end(), m.begin() + n_train, m.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

SplitIndices manifest_split_indices(const DatasetManifest& manifest) {
  SplitIndices out;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    switch (manifest.records[i].split) {
      case SplitTag::Train: out.train.push_back(i); break;
      case SplitTag::Test: out.test.push_back(i); break;
      case SplitTag::Val: break;
      case SplitTag::None:
        throw Error(Errc::ConfigInvalid, "record '" + manifest.records[i].path + "' has no split tag");
    }
  }
  if (out.train.empty() || out.test.empty())
    throw Error(Errc::ConfigInvalid, "manifest split needs both train and test records");
  return out;
}

SplitIndices split_indices(const DatasetManifest& manifest, const SplitSpec& spec) {
  if (spec.mode == SplitSpec::Mode::ManifestProvided) return manifest_split_indices(manifest);
  return stratified_split_indices(manifest.label_indices(), static_cast<int>(manifest.class_names().size()),
                                  spec.train_fraction, spec.seed);
}

std::pair<DatasetManifest, DatasetManifest> stratified_split(const DatasetManifest& manifest, const SplitSpec& spec) {
  const auto idx = split_indices(manifest, spec);
  DatasetManifest train{manifest.root, {}}, test{manifest.root, {}};
  for (auto i : idx.train) train.records.push_back(manifest.records[i]);
  for (auto i : idx.test) test.records.push_back(manifest.records[i]);
  return {std::move(train), std::move(test)};
}

}  // namespace cpath
