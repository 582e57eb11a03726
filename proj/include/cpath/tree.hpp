#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cpath {

/// Binary decision tree in a flat node array; node 0 is the root.
/// Internal nodes send x[feature] <= threshold to `left`.
struct DecisionTree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t value_offset = -1;  // leaves only: start of payload in `values`

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  std::vector<Node> nodes;
  std::vector<double> values;
  /// Payload length per leaf: class count for forests, 1 for boosting.
  std::uint32_t leaf_width = 1;

  std::span<const double> leaf_values(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

/// Threshold strictly between two consecutive distinct sorted values such
/// that lo <= t < hi.
double split_threshold(double lo, double hi) noexcept;

}  // namespace cpath
