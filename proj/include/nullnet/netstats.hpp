#pragma once

// Higher-order node statistics: average nearest-neighbour degree (ANND),
// binary clustering, average nearest-neighbour strength (ANNS) and weighted
// clustering, observed on a graph or expected under fitted multipliers.
//
// Definedness: ANND / ANNS need k_i >= 1 (expected: <k_i> > 0); the two
// clustering coefficients need k_i >= 2 (expected: a positive denominator).
// Undefined entries are std::nullopt and are excluded from summaries.
//
// Expected values are ratios of expectations, computed from the factorised
// pair moments p_ij, <w_ij> and <w_ij^{1/3}>.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nullnet/errors.hpp"
#include "nullnet/graph.hpp"
#include "nullnet/models.hpp"

namespace nullnet {

using MaybeValue = std::optional<double>;

enum class StatisticKind { annd, clustering, anns, weighted_clustering };

inline constexpr StatisticKind kAllStatistics[] = {StatisticKind::annd, StatisticKind::clustering,
                                                   StatisticKind::anns, StatisticKind::weighted_clustering};

inline std::string_view to_string(StatisticKind s) {
  switch (s) {
    case StatisticKind::annd: return "knn";
    case StatisticKind::clustering: return "c";
    case StatisticKind::anns: return "snn";
    case StatisticKind::weighted_clustering: return "cw";
  }
  return "?";
}

/// Binary statistics are compared against degrees, weighted ones against strengths.
inline bool uses_strength(StatisticKind s) {
  return s == StatisticKind::anns || s == StatisticKind::weighted_clustering;
}

struct NodeStatistics {
  std::vector<std::string> nodes;
  std::vector<double> degree;
  std::vector<double> strength;
  std::vector<MaybeValue> annd;
  std::vector<MaybeValue> clustering;
  std::vector<MaybeValue> anns;
  std::vector<MaybeValue> weighted_clustering;
  std::optional<ModelKind> model;  // nullopt: observed

  std::size_t size() const noexcept { return degree.size(); }

  const std::vector<MaybeValue>& get(StatisticKind s) const {
    switch (s) {
      case StatisticKind::annd: return annd;
      case StatisticKind::clustering: return clustering;
      case StatisticKind::anns: return anns;
      case StatisticKind::weighted_clustering: return weighted_clustering;
    }
    throw DomainError("unknown statistic");
  }

  std::vector<MaybeValue> constraint_for(StatisticKind s) const {
    const auto& src = uses_strength(s) ? strength : degree;
    return {src.begin(), src.end()};
  }

  /// Rescales the weighted quantities (s, snn, cw) by `factor`, as when
  /// reporting weights normalised by the total weight.
  NodeStatistics scaled_weights(double factor) const {
    NodeStatistics out = *this;
    for (auto& v : out.strength) v *= factor;
    for (auto& v : out.anns)
      if (v) *v *= factor;
    for (auto& v : out.weighted_clustering)
      if (v) *v *= factor;
    return out;
  }
};

namespace stats_detail {

inline MaybeValue ratio(double num, double den) {
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

inline NodeStatistics blank(const std::vector<std::string>& nodes) {
  const std::size_t n = nodes.size();
  NodeStatistics st;
  st.nodes = nodes;
  st.degree.assign(n, 0.0);
  st.strength.assign(n, 0.0);
  st.annd.assign(n, std::nullopt);
  st.clustering.assign(n, std::nullopt);
  st.anns.assign(n, std::nullopt);
  st.weighted_clustering.assign(n, std::nullopt);
  return st;
}

}  // namespace stats_detail

inline NodeStatistics observed_stats(const WeightedGraph& graph) {
  const std::size_t n = graph.size();
  auto st = stats_detail::blank(graph.nodes());
  const auto c = local_constraints(graph);
  for (std::size_t i = 0; i < n; ++i) {
    st.degree[i] = static_cast<double>(c.degrees[i]);
    st.strength[i] = static_cast<double>(c.strengths[i]);
  }
  std::vector<std::vector<std::size_t>> neighbours(n);
  SquareMatrix<double> cube_root(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (graph.weight(i, j) > 0) {
        neighbours[i].push_back(j);
        cube_root(i, j) = std::cbrt(static_cast<double>(graph.weight(i, j)));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nb = neighbours[i];
    const double k = st.degree[i];
    if (nb.empty()) continue;
    double sum_k = 0.0, sum_s = 0.0;
    for (auto j : nb) {
      sum_k += st.degree[j];
      sum_s += st.strength[j];
    }
    st.annd[i] = sum_k / k;
    st.anns[i] = sum_s / k;
    if (nb.size() < 2) continue;
    double triangles = 0.0, intensity = 0.0;
    for (auto j : nb) {
      for (auto l : nb) {
        if (l == j || graph.weight(j, l) == 0) continue;
        triangles += 1.0;
        intensity += cube_root(i, j) * cube_root(j, l) * cube_root(l, i);
      }
    }
    const double pairs = k * (k - 1.0);
    st.clustering[i] = triangles / pairs;
    st.weighted_clustering[i] = intensity / pairs;
  }
  return st;
}

/// Expected statistics from precomputed pair moments.
inline NodeStatistics expected_stats(const PairMatrices& pairs, const std::vector<std::string>& nodes,
                                     std::optional<ModelKind> model = std::nullopt) {
  const std::size_t n = pairs.link_probability.size();
  if (nodes.size() != n) throw InputError("node labels do not match pair matrices");
  const bool weighted_clustering = pairs.mean_cube_root.size() == n;
  auto st = stats_detail::blank(nodes);
  st.model = model;

  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  auto as_eigen = [n](const SquareMatrix<double>& m) {
    return Eigen::Map<const Mat>(m.values().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  };
  const auto P = as_eigen(pairs.link_probability);
  const auto Wm = as_eigen(pairs.mean_weight);
  const Eigen::VectorXd k = P.rowwise().sum();
  const Eigen::VectorXd s = Wm.rowwise().sum();
  const Eigen::VectorXd pk = P * k;
  const Eigen::VectorXd ps = P * s;
  // Diagonal of M^3 for zero-diagonal M is the sum over j != i, l != i, j.
  const Eigen::VectorXd closed_p = (P * P).cwiseProduct(P).rowwise().sum();
  Eigen::VectorXd closed_q;
  if (weighted_clustering) {
    const auto Q = as_eigen(pairs.mean_cube_root);
    closed_q = (Q * Q).cwiseProduct(Q).rowwise().sum();
  }
  const Eigen::VectorXd p_sq = P.cwiseProduct(P).rowwise().sum();

  for (std::size_t i = 0; i < n; ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    st.degree[i] = k[e];
    st.strength[i] = s[e];
    st.annd[i] = stats_detail::ratio(pk[e], k[e]);
    st.anns[i] = stats_detail::ratio(ps[e], k[e]);
    const double wedges = k[e] * k[e] - p_sq[e];
    st.clustering[i] = stats_detail::ratio(closed_p[e], wedges);
    if (weighted_clustering) st.weighted_clustering[i] = stats_detail::ratio(closed_q[e], wedges);
  }
  return st;
}

inline NodeStatistics expected_stats(const ModelParams& params) {
  return expected_stats(build_pair_matrices(params, true), params.nodes, params.kind);
}

struct Interval {
  double low;
  double high;
};

/// Metrics of one list of node values: (i) mean, (ii) population standard
/// deviation, (iii) Pearson correlation with the constraint list and (iv)
/// Pearson correlation with the matching observed/expected list.
struct PanelSummary {
  std::size_t defined = 0;
  MaybeValue mean;
  MaybeValue std_dev;
  MaybeValue corr_constraint;
  MaybeValue corr_expected;

  // Optional Monte Carlo intervals for the four metrics.
  std::optional<Interval> mean_ci, std_dev_ci, corr_constraint_ci, corr_expected_ci;

  bool valid() const noexcept { return mean.has_value(); }
};

namespace stats_detail {

/// Pearson correlation over entries defined in both lists; nullopt if fewer
/// than two pairs or either side has zero variance.
inline MaybeValue pearson(const std::vector<MaybeValue>& a, const std::vector<MaybeValue>& b) {
  if (a.size() != b.size()) throw InputError("correlated lists differ in length");
  double n = 0.0, ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i] || !b[i]) continue;
    n += 1.0;
    ma += *a[i];
    mb += *b[i];
  }
  if (n < 2.0) return std::nullopt;
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i] || !b[i]) continue;
    const double da = *a[i] - ma, db = *b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace stats_detail

inline PanelSummary panel_summary(const std::vector<MaybeValue>& values, const std::vector<MaybeValue>& constraint,
                                  const std::vector<MaybeValue>& expected) {
  if (values.size() != constraint.size() || values.size() != expected.size())
    throw InputError("panel lists differ in length");
  PanelSummary out;
  double sum = 0.0;
  for (const auto& v : values)
    if (v) {
      ++out.defined;
      sum += *v;
    }
  if (out.defined < 2) return out;
  const double mean = sum / static_cast<double>(out.defined);
  double ss = 0.0;
  for (const auto& v : values)
    if (v) ss += (*v - mean) * (*v - mean);
  out.mean = mean;
  out.std_dev = std::sqrt(ss / static_cast<double>(out.defined));
  out.corr_constraint = stats_detail::pearson(values, constraint);
  out.corr_expected = stats_detail::pearson(values, expected);
  return out;
}

}  // namespace nullnet
