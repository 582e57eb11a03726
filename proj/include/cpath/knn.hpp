#pragma once

#include <span>
#include <vector>

#include "cpath/matrix.hpp"

namespace cpath {

struct KnnParams {
  int k = 5;
};

/// Stores the (already standardized) training rows verbatim.
struct KnnModel {
  int k = 5;
  int num_classes = 0;
  Matrix rows;
  std::vector<int> labels;
};

KnnModel fit_knn(const Matrix& rows, std::span<const int> labels, int num_classes, const KnnParams& params);

/// Indices of the k nearest rows by squared Euclidean distance, nearest
/// first; equal distances order by row index.
std::vector<std::size_t> nearest_rows(const KnnModel& model, std::span<const double> query);

/// Majority vote over the k nearest rows; vote ties go to the smallest class.
int predict(const KnnModel& model, std::span<const double> query);

/// OpenMP over queries.
std::vector<int> predict_batch(const KnnModel& model, const Matrix& queries);

namespace serial {
std::vector<int> predict_batch(const KnnModel& model, const Matrix& queries);
}

}  // namespace cpath
