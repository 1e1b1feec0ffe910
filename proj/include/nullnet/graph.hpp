#pragma once

// Integer-weighted undirected graphs: the substrate every model is fitted to.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "nullnet/errors.hpp"
#include "nullnet/matrix.hpp"

namespace nullnet {

using Weight = std::int64_t;

/// Symmetric matrix of non-negative integer weights with zero diagonal over
/// a fixed, labelled node set. The invariants are checked on construction and
/// the value is immutable afterwards.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  WeightedGraph(std::vector<std::string> nodes, SquareMatrix<Weight> weights)
      : nodes_(std::move(nodes)), weights_(std::move(weights)) {
    if (nodes_.size() != weights_.size())
      throw InputError("node label count does not match matrix dimension");
    const std::size_t n = weights_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (weights_(i, i) != 0) throw InputError("graph has a nonzero diagonal entry");
      for (std::size_t j = i + 1; j < n; ++j) {
        if (weights_(i, j) < 0) throw InputError("graph has a negative weight");
        if (weights_(i, j) != weights_(j, i)) throw InputError("graph weights are not symmetric");
      }
    }
  }

  /// Unlabelled graph; nodes are named "0", "1", ...
  explicit WeightedGraph(SquareMatrix<Weight> weights)
      : WeightedGraph(default_labels(weights.size()), std::move(weights)) {}

  struct Edge {
    std::size_t i;
    std::size_t j;
    Weight w;
  };

  static WeightedGraph from_edges(std::size_t n, const std::vector<Edge>& edges) {
    SquareMatrix<Weight> m(n);
    for (const auto& e : edges) {
      if (e.i >= n || e.j >= n) throw InputError("edge endpoint out of range");
      m(e.i, e.j) = e.w;
      m(e.j, e.i) = e.w;
    }
    return WeightedGraph(std::move(m));
  }

  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const SquareMatrix<Weight>& weights() const noexcept { return weights_; }
  Weight weight(std::size_t i, std::size_t j) const noexcept { return weights_(i, j); }

  /// W_TOT: sum over unordered pairs i < j.
  Weight total_weight() const noexcept {
    Weight total = 0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) total += weights_(i, j);
    return total;
  }

  friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;

  static std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
    return labels;
  }

 private:
  std::vector<std::string> nodes_;
  SquareMatrix<Weight> weights_;
};

/// Degree and strength sequences.
struct LocalConstraints {
  std::vector<Weight> degrees;
  std::vector<Weight> strengths;

  bool isolated(std::size_t i) const noexcept { return degrees[i] == 0; }
};

inline LocalConstraints local_constraints(const WeightedGraph& graph) {
  const std::size_t n = graph.size();
  LocalConstraints c{std::vector<Weight>(n, 0), std::vector<Weight>(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Weight w = graph.weight(i, j);
      if (w > 0) {
        ++c.degrees[i];
        c.strengths[i] += w;
      }
    }
  }
  return c;
}

/// Undirected integer weights from a directed flow matrix: each pair gets the
/// nearest integer to the mean of the two flows, ties rounded away from zero.
inline WeightedGraph symmetrize_and_round(const SquareMatrix<double>& directed,
                                          std::vector<std::string> nodes = {}) {
  const std::size_t n = directed.size();
  if (nodes.empty()) nodes = WeightedGraph::default_labels(n);
  constexpr double kMaxWeight = 9.2e18;
  SquareMatrix<Weight> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double e = directed(i, j);
      if (!std::isfinite(e) || e < 0.0)
        throw InputError("flow matrix entry (" + std::to_string(i) + "," + std::to_string(j) +
                         ") is negative or not finite");
    }
    if (directed(i, i) != 0.0) throw InputError("flow matrix has a nonzero diagonal entry");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double mean = (directed(i, j) + directed(j, i)) / 2.0;
      if (mean > kMaxWeight) throw InputError("flow too large for integer weights");
      const Weight rounded = std::llround(mean);
      w(i, j) = rounded;
      w(j, i) = rounded;
    }
  }
  return WeightedGraph(std::move(nodes), std::move(w));
}

/// Real-valued weights w_ij / W_TOT. Kept apart from WeightedGraph so that the
/// integer fitting substrate is never replaced by a normalized copy.
struct NormalizedWeights {
  std::vector<std::string> nodes;
  SquareMatrix<double> weights;
  Weight total_weight = 0;
};

inline NormalizedWeights normalize_total_weight(const WeightedGraph& graph) {
  const Weight total = graph.total_weight();
  if (total <= 0) throw DegenerateInputError("cannot normalize a graph with zero total weight");
  const std::size_t n = graph.size();
  NormalizedWeights out{graph.nodes(), SquareMatrix<double>(n), total};
  const double inv = 1.0 / static_cast<double>(total);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.weights(i, j) = static_cast<double>(graph.weight(i, j)) * inv;
  return out;
}

}  // namespace nullnet
