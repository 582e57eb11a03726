#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cpath/matrix.hpp"
#include "cpath/tree.hpp"

namespace cpath {

struct ForestParams {
  int trees = 100;
  int max_features = 0;  // candidate dimensions per node; <= 0 means ceil(sqrt(d))
  bool bootstrap = true;
  int min_samples_split = 2;
  int max_depth = 0;  // <= 0: unlimited
  std::uint64_t seed = 0;
};

struct ForestModel {
  int num_classes = 0;
  std::vector<DecisionTree> trees;
};

/// CART trees on Gini impurity. Tree t draws from its own stream
/// derive_seed(seed, t), so the forest is identical for any thread count.
/// Trees are grown in parallel with OpenMP.
ForestModel fit_forest(const Matrix& rows, std::span<const int> labels, int num_classes, const ForestParams& params);

/// One tree; `sample` lists training row indices (duplicates allowed).
DecisionTree grow_classification_tree(const Matrix& rows, std::span<const int> labels, int num_classes,
                                      std::vector<std::size_t> sample, const ForestParams& params,
                                      std::uint64_t tree_seed);

std::vector<double> predict_proba(const ForestModel& model, std::span<const double> x);

/// argmax of the averaged leaf distributions; ties to the smallest class.
int predict(const ForestModel& model, std::span<const double> x);

std::vector<int> predict_batch(const ForestModel& model, const Matrix& queries);

namespace serial {
ForestModel fit_forest(const Matrix& rows, std::span<const int> labels, int num_classes, const ForestParams& params);
std::vector<int> predict_batch(const ForestModel& model, const Matrix& queries);
}  // namespace serial

}  // namespace cpath
