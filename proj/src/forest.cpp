#include "cpath/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cpath/error.hpp"
#include "cpath/rng.hpp"

namespace cpath {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // sum over children of (sum_c n_c^2) / n; larger is purer
};

class TreeGrower {
 public:
  TreeGrower(const Matrix& rows, std::span<const int> labels, int num_classes, const ForestParams& params,
             std::uint64_t seed)
      : rows_(rows), labels_(labels), classes_(static_cast<std::size_t>(num_classes)), params_(params), rng_(seed) {
    const auto d = static_cast<int>(rows.cols());
    mtry_ = params.max_features > 0 ? std::min(params.max_features, d)
                                    : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    mtry_ = std::max(mtry_, 1);
    features_.resize(rows.cols());
    std::iota(features_.begin(), features_.end(), 0);
  }

  DecisionTree grow(std::vector<std::size_t> sample) {
    sample_ = std::move(sample);
    tree_ = DecisionTree{};
    tree_.leaf_width = static_cast<std::uint32_t>(classes_);
    if (sample_.empty()) throw Error(Errc::EmptySet, "tree needs at least one sample");

    struct Task {
      std::int32_t node;
      std::size_t begin, end;
      int depth;
    };
    tree_.nodes.emplace_back();
    std::vector<Task> stack{{0, 0, sample_.size(), 0}};
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();

      const auto counts = class_counts(t.begin, t.end);
      const std::size_t n = t.end - t.begin;
      const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
      const bool depth_cap = params_.max_depth > 0 && t.depth >= params_.max_depth;
      Split split;
      if (!pure && !depth_cap && n >= static_cast<std::size_t>(std::max(params_.min_samples_split, 2)))
        split = best_split(t.begin, t.end, counts);

      if (split.feature < 0) {
        make_leaf(t.node, counts, n);
        continue;
      }

      const auto mid = std::stable_partition(sample_.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                             sample_.begin() + static_cast<std::ptrdiff_t>(t.end),
                                             [&](std::size_t r) { return rows_(r, split.feature) <= split.threshold; });
      const std::size_t m = static_cast<std::size_t>(mid - sample_.begin());

      const auto left = static_cast<std::int32_t>(tree_.nodes.size());
      tree_.nodes.emplace_back();
      tree_.nodes.emplace_back();
      auto& node = tree_.nodes[t.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      // Right pushed first so the left subtree is laid out first.
      stack.push_back({left + 1, m, t.end, t.depth + 1});
      stack.push_back({left, t.begin, m, t.depth + 1});
    }
    return std::move(tree_);
  }

 private:
  std::vector<std::size_t> class_counts(std::size_t begin, std::size_t end) const {
    std::vector<std::size_t> counts(classes_, 0);
    for (std::size_t i = begin; i < end; ++i) ++counts[labels_[sample_[i]]];
    return counts;
  }

  void make_leaf(std::int32_t node, const std::vector<std::size_t>& counts, std::size_t n) {
    tree_.nodes[node].value_offset = static_cast<std::int32_t>(tree_.values.size());
    for (auto c : counts) tree_.values.push_back(static_cast<double>(c) / static_cast<double>(n));
  }

  // Features are visited in a fresh random order; the search stops after
  // mtry features unless none of them admitted a split so far.
  Split best_split(std::size_t begin, std::size_t end, const std::vector<std::size_t>& counts) {
    const std::size_t n = end - begin;
    Split best;
    int visited = 0;
    std::vector<std::pair<double, int>> column(n);
    std::vector<std::size_t> left(classes_);

    for (std::size_t f = 0; f < features_.size(); ++f) {
      if (visited >= mtry_ && best.feature >= 0) break;
      const auto pick = f + uniform_index(rng_, features_.size() - f);
      std::swap(features_[f], features_[pick]);
      const int feat = features_[f];
      ++visited;

      for (std::size_t i = 0; i < n; ++i) {
        const auto r = sample_[begin + i];
        column[i] = {rows_(r, feat), labels_[r]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;

      std::fill(left.begin(), left.end(), 0);
      double left_sq = 0.0;
      double right_sq = 0.0;
      for (auto c : counts) right_sq += static_cast<double>(c) * static_cast<double>(c);
      for (std::size_t i = 1; i < n; ++i) {
        const int y = column[i - 1].second;
        const auto ry = counts[y] - left[y];
        left_sq += 2.0 * static_cast<double>(left[y]) + 1.0;
        right_sq -= 2.0 * static_cast<double>(ry) - 1.0;
        ++left[y];
        if (column[i - 1].first == column[i].first) continue;
        const double score = left_sq / static_cast<double>(i) + right_sq / static_cast<double>(n - i);
        if (score > best.score) {
          best.score = score;
          best.feature = feat;
          best.threshold = split_threshold(column[i - 1].first, column[i].first);
        }
      }
    }
    return best;
  }

  const Matrix& rows_;
  std::span<const int> labels_;
  std::size_t classes_;
  ForestParams params_;
  Rng rng_;
  int mtry_ = 1;
  std::vector<int> features_;
  std::vector<std::size_t> sample_;
  DecisionTree tree_;
};

void check_forest_inputs(const Matrix& rows, std::span<const int> labels, int num_classes,
                         const ForestParams& params) {
  if (rows.empty()) throw Error(Errc::EmptySet, "random forest needs at least one training row");
  if (labels.size() != rows.rows()) throw Error(Errc::DimensionMismatch, "labels and rows differ in count");
  if (num_classes < 2) throw Error(Errc::InvalidArgument, "random forest needs at least 2 classes");
  if (params.trees < 1) throw Error(Errc::InvalidArgument, "random forest needs at least one tree");
}

std::vector<std::size_t> tree_sample(std::size_t n, bool bootstrap, Rng& rng) {
  std::vector<std::size_t> sample(n);
  if (bootstrap)
    for (auto& s : sample) s = uniform_index(rng, n);
  else
    std::iota(sample.begin(), sample.end(), std::size_t{0});
  return sample;
}

DecisionTree grow_tree_t(const Matrix& rows, std::span<const int> labels, int num_classes,
                         const ForestParams& params, std::size_t t) {
  // Bootstrap and node sampling share one stream per tree.
  const auto seed = derive_seed(params.seed, t);
  Rng rng(seed);
  auto sample = tree_sample(rows.rows(), params.bootstrap, rng);
  return grow_classification_tree(rows, labels, num_classes, std::move(sample), params, rng());
}

}  // namespace

DecisionTree grow_classification_tree(const Matrix& rows, std::span<const int> labels, int num_classes,
                                      std::vector<std::size_t> sample, const ForestParams& params,
                                      std::uint64_t tree_seed) {
  TreeGrower grower(rows, labels, num_classes, params, tree_seed);
  return grower.grow(std::move(sample));
}

ForestModel fit_forest(const Matrix& rows, std::span<const int> labels, int num_classes, const ForestParams& params) {
  check_forest_inputs(rows, labels, num_classes, params);
  ForestModel model;
  model.num_classes = num_classes;
  model.trees.resize(static_cast<std::size_t>(params.trees));
  const auto n = static_cast<std::ptrdiff_t>(params.trees);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t t = 0; t < n; ++t)
    model.trees[t] = grow_tree_t(rows, labels, num_classes, params, static_cast<std::size_t>(t));
  return model;
}

std::vector<double> predict_proba(const ForestModel& model, std::span<const double> x) {
  std::vector<double> p(static_cast<std::size_t>(model.num_classes), 0.0);
  for (const auto& tree : model.trees) {
    const auto leaf = tree.leaf_values(x);
    for (std::size_t c = 0; c < p.size(); ++c) p[c] += leaf[c];
  }
  for (auto& v : p) v /= static_cast<double>(model.trees.size());
  return p;
}

int predict(const ForestModel& model, std::span<const double> x) {
  const auto p = predict_proba(model, x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<int> predict_batch(const ForestModel& model, const Matrix& queries) {
  std::vector<int> out(queries.rows());
  const auto n = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict(model, queries.row(i));
  return out;
}

namespace serial {

ForestModel fit_forest(const Matrix& rows, std::span<const int> labels, int num_classes, const ForestParams& params) {
  check_forest_inputs(rows, labels, num_classes, params);
  ForestModel model;
  model.num_classes = num_classes;
  for (std::size_t t = 0; t < static_cast<std::size_t>(params.trees); ++t)
    model.trees.push_back(grow_tree_t(rows, labels, num_classes, params, t));
  return model;
}

std::vector<int> predict_batch(const ForestModel& model, const Matrix& queries) {
  std::vector<int> out;
  out.reserve(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) out.push_back(predict(model, queries.row(i)));
  return out;
}

}  // namespace serial

}  // namespace cpath
