#include "cpath/knn.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "cpath/error.hpp"

namespace cpath {

KnnModel fit_knn(const Matrix& rows, std::span<const int> labels, int num_classes, const KnnParams& params) {
  if (rows.empty()) throw Error(Errc::EmptySet, "knn needs at least one training row");
  if (params.k < 1 || static_cast<std::size_t>(params.k) > rows.rows())
    throw Error(Errc::BadK, "k = " + std::to_string(params.k) + " with " + std::to_string(rows.rows()) + " rows");
  KnnModel m;
  m.k = params.k;
  m.num_classes = num_classes;
  m.rows = rows;
  m.labels.assign(labels.begin(), labels.end());
  return m;
}

std::vector<std::size_t> nearest_rows(const KnnModel& model, std::span<const double> query) {
  if (query.size() != model.rows.cols())
    throw Error(Errc::DimensionMismatch, "query has " + std::to_string(query.size()) + " features, model has " +
                                             std::to_string(model.rows.cols()));
  const std::size_t n = model.rows.rows();
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = model.rows.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double d = r[j] - query[j];
      s += d * d;
    }
    dist[i] = s;
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
  const auto k = static_cast<std::size_t>(model.k);
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(), closer);
  std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), closer);
  idx.resize(k);
  return idx;
}

int predict(const KnnModel& model, std::span<const double> query) {
  std::vector<int> votes(static_cast<std::size_t>(model.num_classes), 0);
  for (auto i : nearest_rows(model, query)) ++votes[model.labels[i]];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<int> predict_batch(const KnnModel& model, const Matrix& queries) {
  if (queries.cols() != model.rows.cols() && !queries.empty())
    throw Error(Errc::DimensionMismatch, "query matrix width differs from model");
  std::vector<int> out(queries.rows());
  const auto n = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict(model, queries.row(i));
  return out;
}

namespace serial {

std::vector<int> predict_batch(const KnnModel& model, const Matrix& queries) {
  std::vector<int> out;
  out.reserve(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) out.push_back(predict(model, queries.row(i)));
  return out;
}

}  // namespace serial

}  // namespace cpath
