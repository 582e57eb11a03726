#include "cpath/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cpath/error.hpp"

namespace cpath {

namespace {

constexpr double kHessFloor = 1e-16;
constexpr double kMinGain = 1e-12;

void check_boost_inputs(const Matrix& rows, std::span<const int> labels, int num_classes, const BoostParams& p) {
  if (rows.empty()) throw Error(Errc::EmptySet, "boosting needs at least one training row");
  if (labels.size() != rows.rows()) throw Error(Errc::DimensionMismatch, "labels and rows differ in count");
  if (num_classes < 2) throw Error(Errc::InvalidArgument, "boosting needs at least 2 classes");
  if (p.rounds < 1 || p.max_depth < 1 || !(p.learning_rate > 0.0) || !(p.lambda >= 0.0))
    throw Error(Errc::InvalidArgument, "boosting needs rounds >= 1, max_depth >= 1, learning_rate > 0, lambda >= 0");
}

std::vector<std::vector<std::size_t>> presort(const Matrix& rows) {
  std::vector<std::vector<std::size_t>> order(rows.cols());
  for (std::size_t f = 0; f < rows.cols(); ++f) {
    auto& o = order[f];
    o.resize(rows.rows());
    std::iota(o.begin(), o.end(), std::size_t{0});
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return rows(a, f) < rows(b, f); });
  }
  return order;
}

double mean_loss(const Matrix& scores, std::span<const int> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) s += softmax_loss(scores.row(i), labels[i]);
  return s / static_cast<double>(scores.rows());
}

template <bool Parallel>
BoostModel fit_impl(const Matrix& rows, std::span<const int> labels, int num_classes, const BoostParams& params,
                    std::vector<double>* loss_trace) {
  check_boost_inputs(rows, labels, num_classes, params);
  const std::size_t n = rows.rows();
  const auto nc = static_cast<std::size_t>(num_classes);

  BoostModel model;
  model.num_classes = num_classes;
  model.rounds = params.rounds;
  model.learning_rate = params.learning_rate;
  model.base_score = 0.0;
  model.trees.reserve(static_cast<std::size_t>(params.rounds) * nc);

  const auto order = presort(rows);
  Matrix scores(n, nc, model.base_score);
  std::vector<std::vector<double>> grad(nc, std::vector<double>(n)), hess(nc, std::vector<double>(n));
  if (loss_trace) loss_trace->clear();

  for (int r = 0; r < params.rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = softmax_derivatives(scores.row(i), labels[i]);
      for (std::size_t c = 0; c < nc; ++c) {
        grad[c][i] = d.grad[c];
        hess[c][i] = d.hess[c];
      }
    }

    std::vector<DecisionTree> round_trees(nc);
    const auto ncs = static_cast<std::ptrdiff_t>(nc);
#pragma omp parallel for schedule(dynamic, 1) if (Parallel)
    for (std::ptrdiff_t c = 0; c < ncs; ++c) round_trees[c] = grow_newton_tree(rows, order, grad[c], hess[c], params);

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < nc; ++c) scores(i, c) += round_trees[c].leaf_values(rows.row(i))[0];
    for (auto& t : round_trees) model.trees.push_back(std::move(t));
    if (loss_trace) loss_trace->push_back(mean_loss(scores, labels));
  }
  return model;
}

}  // namespace

std::vector<double> softmax(std::span<const double> scores) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double z = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) z += (p[c] = std::exp(scores[c] - mx));
  for (auto& v : p) v /= z;
  return p;
}

double softmax_loss(std::span<const double> scores, int label) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  return mx + std::log(z) - scores[label];
}

SoftmaxDerivatives softmax_derivatives(std::span<const double> scores, int label) {
  SoftmaxDerivatives d;
  d.grad = softmax(scores);
  d.hess.resize(d.grad.size());
  for (std::size_t c = 0; c < d.grad.size(); ++c) {
    const double p = d.grad[c];
    d.hess[c] = std::max(p * (1.0 - p), kHessFloor);
    if (static_cast<int>(c) == label) d.grad[c] -= 1.0;
  }
  return d;
}

DecisionTree grow_newton_tree(const Matrix& rows, const std::vector<std::vector<std::size_t>>& order,
                              std::span<const double> grad, std::span<const double> hess, const BoostParams& params) {
  const std::size_t n = rows.rows();
  const double lambda = params.lambda;
  const auto leaf_score = [lambda](double g, double h) { return g * g / (h + lambda); };

  DecisionTree tree;
  tree.leaf_width = 1;
  tree.nodes.emplace_back();
  std::vector<double> node_g{0.0}, node_h{0.0};
  for (std::size_t i = 0; i < n; ++i) {
    node_g[0] += grad[i];
    node_h[0] += hess[i];
  }
  std::vector<std::int32_t> node_of(n, 0);
  std::vector<std::int32_t> frontier{0};

  struct Candidate {
    double gain = kMinGain;
    int feature = -1;
    double threshold = 0.0;
    double left_g = 0.0, left_h = 0.0;
  };

  for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
    std::vector<std::int32_t> slot(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) slot[frontier[s]] = static_cast<std::int32_t>(s);
    std::vector<Candidate> best(frontier.size());

    std::vector<double> gl(frontier.size()), hl(frontier.size()), last(frontier.size());
    std::vector<char> seen(frontier.size());
    for (std::size_t f = 0; f < rows.cols(); ++f) {
      std::fill(gl.begin(), gl.end(), 0.0);
      std::fill(hl.begin(), hl.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      for (auto i : order[f]) {
        const auto s = slot[node_of[i]];
        if (s < 0) continue;
        const double v = rows(i, f);
        if (seen[s] && v > last[s]) {
          const auto node = frontier[s];
          const double gr = node_g[node] - gl[s], hr = node_h[node] - hl[s];
          if (hl[s] >= params.min_child_weight && hr >= params.min_child_weight) {
            const double gain =
                leaf_score(gl[s], hl[s]) + leaf_score(gr, hr) - leaf_score(node_g[node], node_h[node]);
            if (gain > best[s].gain) best[s] = {gain, static_cast<int>(f), split_threshold(last[s], v), gl[s], hl[s]};
          }
        }
        gl[s] += grad[i];
        hl[s] += hess[i];
        last[s] = v;
        seen[s] = 1;
      }
    }

    std::vector<std::int32_t> next;
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      if (best[s].feature < 0) continue;
      const auto node = frontier[s];
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      tree.nodes[node].feature = best[s].feature;
      tree.nodes[node].threshold = best[s].threshold;
      tree.nodes[node].left = left;
      tree.nodes[node].right = left + 1;
      node_g.push_back(best[s].left_g);
      node_h.push_back(best[s].left_h);
      node_g.push_back(node_g[node] - best[s].left_g);
      node_h.push_back(node_h[node] - best[s].left_h);
      next.push_back(left);
      next.push_back(left + 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& nd = tree.nodes[node_of[i]];
      if (nd.is_leaf()) continue;
      node_of[i] = rows(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    frontier = std::move(next);
  }

  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    auto& nd = tree.nodes[k];
    if (!nd.is_leaf()) continue;
    nd.value_offset = static_cast<std::int32_t>(tree.values.size());
    tree.values.push_back(-node_g[k] / (node_h[k] + lambda) * params.learning_rate);
  }
  return tree;
}

BoostModel fit_boosting(const Matrix& rows, std::span<const int> labels, int num_classes, const BoostParams& params,
                        std::vector<double>* loss_trace) {
  return fit_impl<true>(rows, labels, num_classes, params, loss_trace);
}

std::vector<double> raw_scores(const BoostModel& model, std::span<const double> x) {
  const auto nc = static_cast<std::size_t>(model.num_classes);
  std::vector<double> s(nc, model.base_score);
  for (std::size_t t = 0; t < model.trees.size(); ++t) s[t % nc] += model.trees[t].leaf_values(x)[0];
  return s;
}

int predict(const BoostModel& model, std::span<const double> x) {
  const auto s = raw_scores(model, x);
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

std::vector<int> predict_batch(const BoostModel& model, const Matrix& queries) {
  std::vector<int> out(queries.rows());
  const auto n = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict(model, queries.row(i));
  return out;
}

namespace serial {

BoostModel fit_boosting(const Matrix& rows, std::span<const int> labels, int num_classes, const BoostParams& params,
                        std::vector<double>* loss_trace) {
  return fit_impl<false>(rows, labels, num_classes, params, loss_trace);
}

std::vector<int> predict_batch(const BoostModel& model, const Matrix& queries) {
  std::vector<int> out;
  out.reserve(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) out.push_back(predict(model, queries.row(i)));
  return out;
}

}  // namespace serial

}  // namespace cpath
