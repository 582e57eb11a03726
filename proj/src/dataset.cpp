#include "cpath/dataset.hpp"

#include <cmath>

#include "cpath/error.hpp"

namespace cpath {

void TrainingSet::validate() const {
  if (labels.empty()) throw Error(Errc::EmptySet, "training set has no rows");
  if (features.rows() != labels.size())
    throw Error(Errc::DimensionMismatch, std::to_string(features.rows()) + " feature rows but " +
                                             std::to_string(labels.size()) + " labels");
  if (class_names.size() < 2) throw Error(Errc::InvalidArgument, "need at least 2 classes");
  for (int y : labels)
    if (y < 0 || y >= num_classes())
      throw Error(Errc::InvalidArgument, "label " + std::to_string(y) + " outside class range");
}

TrainingSet TrainingSet::subset(std::span<const std::size_t> rows) const {
  TrainingSet out;
  out.features = features.select_rows(rows);
  out.labels.reserve(rows.size());
  for (auto r : rows) out.labels.push_back(labels[r]);
  out.class_names = class_names;
  return out;
}

std::vector<std::string> default_class_names(int count) {
  std::vector<std::string> names;
  for (int c = 0; c < count; ++c) names.push_back("class" + std::to_string(c));
  return names;
}

Standardizer Standardizer::fit(const Matrix& rows) {
  if (rows.empty()) throw Error(Errc::EmptySet, "cannot fit a standardizer on zero rows");
  const std::size_t n = rows.rows(), d = rows.cols();
  Standardizer st;
  st.mean.assign(d, 0.0);
  st.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) st.mean[j] += rows(i, j);
  for (auto& m : st.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = rows(i, j) - st.mean[j];
      st.scale[j] += dev * dev;
    }
  for (auto& s : st.scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s >= kScaleFloor)) s = 1.0;
  }
  return st;
}

std::vector<double> Standardizer::transform(std::span<const double> x) const {
  std::vector<double> out(x.begin(), x.end());
  transform_in_place(out);
  return out;
}

void Standardizer::transform_in_place(std::span<double> x) const {
  if (x.size() != dim())
    throw Error(Errc::DimensionMismatch,
                "feature vector has " + std::to_string(x.size()) + " entries, model expects " + std::to_string(dim()));
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean[j]) / scale[j];
}

Matrix Standardizer::transform(const Matrix& rows) const {
  Matrix out = rows;
  for (std::size_t i = 0; i < out.rows(); ++i) transform_in_place(out.row(i));
  return out;
}

}  // namespace cpath
