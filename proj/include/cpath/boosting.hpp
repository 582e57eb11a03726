#pragma once

#include <span>
#include <vector>

#include "cpath/matrix.hpp"
#include "cpath/tree.hpp"

namespace cpath {

struct BoostParams {
  int rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  double lambda = 1.0;            // L2 penalty on leaf weights
  double min_child_weight = 1.0;  // minimum hessian sum per child
};

/// Softmax gradient-boosted regression trees. trees[round * C + c] is the
/// round's tree for class c; leaf values already include the learning rate.
struct BoostModel {
  int num_classes = 0;
  int rounds = 0;
  double learning_rate = 0.1;
  double base_score = 0.0;
  std::vector<DecisionTree> trees;
};

struct SoftmaxDerivatives {
  std::vector<double> grad;  // p_c - [c == label]
  std::vector<double> hess;  // p_c (1 - p_c), floored
};

std::vector<double> softmax(std::span<const double> scores);
/// -log softmax(scores)[label], computed with log-sum-exp.
double softmax_loss(std::span<const double> scores, int label);
SoftmaxDerivatives softmax_derivatives(std::span<const double> scores, int label);

/// `loss_trace`, if given, receives the mean training cross-entropy after
/// each round. Per-class trees of a round are grown in parallel.
BoostModel fit_boosting(const Matrix& rows, std::span<const int> labels, int num_classes, const BoostParams& params,
                        std::vector<double>* loss_trace = nullptr);

/// Regression tree on (grad, hess) with Newton leaf weights
/// -sum g / (sum h + lambda), scaled by the learning rate.
/// `order[f]` lists all rows sorted by feature f.
DecisionTree grow_newton_tree(const Matrix& rows, const std::vector<std::vector<std::size_t>>& order,
                              std::span<const double> grad, std::span<const double> hess, const BoostParams& params);

std::vector<double> raw_scores(const BoostModel& model, std::span<const double> x);
int predict(const BoostModel& model, std::span<const double> x);
std::vector<int> predict_batch(const BoostModel& model, const Matrix& queries);

namespace serial {
BoostModel fit_boosting(const Matrix& rows, std::span<const int> labels, int num_classes, const BoostParams& params,
                        std::vector<double>* loss_trace = nullptr);
std::vector<int> predict_batch(const BoostModel& model, const Matrix& queries);
}  // namespace serial

}  // namespace cpath
