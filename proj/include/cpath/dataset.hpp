#pragma once

#include <span>
#include <string>
#include <vector>

#include "cpath/matrix.hpp"

namespace cpath {

/// Feature rows with class indices in [0, class_names.size()).
/// Classes may have zero rows (e.g. a subset of a larger task).
struct TrainingSet {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  int num_classes() const noexcept { return static_cast<int>(class_names.size()); }

  /// Throws EmptySet, DimensionMismatch or InvalidArgument on a malformed set.
  void validate() const;

  TrainingSet subset(std::span<const std::size_t> rows) const;
};

/// Class names "class0".."class{C-1}" for sets without a manifest.
std::vector<std::string> default_class_names(int count);

/// Per-column standardization fitted on training rows only.
struct Standardizer {
  static constexpr double kScaleFloor = 1e-12;

  std::vector<double> mean;
  std::vector<double> scale;

  /// Column means and population standard deviations; a deviation below the
  /// floor is replaced by 1 so constant columns pass through centered.
  static Standardizer fit(const Matrix& rows);

  std::size_t dim() const noexcept { return mean.size(); }
  std::vector<double> transform(std::span<const double> x) const;
  void transform_in_place(std::span<double> x) const;
  Matrix transform(const Matrix& rows) const;

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

}  // namespace cpath
