#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpath/manifest.hpp"

namespace cpath {

/// counts[t * C + p]: rows are true classes, columns predictions.
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * num_classes + predicted];
  }
  std::uint64_t support(int truth) const;
  std::uint64_t total() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int num_classes);

/// Throws ZeroSupportClass when a class has no true samples.
std::vector<double> per_class_recall(const ConfusionMatrix& cm);

/// Unweighted mean of per-class recall.
double balanced_accuracy(const ConfusionMatrix& cm);

double accuracy(const ConfusionMatrix& cm);

/// Source label -> target label, many-to-one.
using LabelMapping = std::map<std::string, std::string>;

/// The nine PathMNIST tissue classes in dataset index order.
const std::vector<std::string>& pathmnist_class_names();

/// Normal: Adipose, Background, Mucus, Smooth Muscle, Normal Colon Mucosa.
/// Abnormal: Debris, Lymphocytes, Cancer-Associated Stroma, CRC Epithelium.
LabelMapping pathmnist_binary_mapping();

/// Relabels every record; throws UnmappedLabel for a label missing from the mapping.
DatasetManifest map_binary_labels(const DatasetManifest& manifest, const LabelMapping& mapping);

struct SplitSpec {
  enum class Mode { RandomStratified, ManifestProvided };
  Mode mode = Mode::RandomStratified;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Sorted row indices of each side.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per class: round(fraction * n) training rows, clamped to [1, n - 1].
/// Class c shuffles with its own stream derive_seed(seed, c). Throws
/// TinyClass for a present class with fewer than 2 rows.
SplitIndices stratified_split_indices(std::span<const int> labels, int num_classes, double train_fraction,
                                      std::uint64_t seed);

/// train <- "train" records, test <- "test" records; "val" is left out.
SplitIndices manifest_split_indices(const DatasetManifest& manifest);

SplitIndices split_indices(const DatasetManifest& manifest, const SplitSpec& spec);

std::pair<DatasetManifest, DatasetManifest> stratified_split(const DatasetManifest& manifest, const SplitSpec& spec);

}  // namespace cpath
