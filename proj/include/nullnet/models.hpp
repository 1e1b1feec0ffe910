#pragma once

// Pair-level probability kernels of the enhanced (degree + strength) and the
// weighted (strength only) configuration models.
//
// For a pair with u = x_i x_j and v = y_i y_j the weight distribution is
//   q(w) = u^[w>0] v^w (1 - v) / (1 - v + u v),
// i.e. a Bernoulli link with probability p = u v / (1 - v + u v) followed by a
// geometric number of extra units with continuation probability v.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nullnet/errors.hpp"
#include "nullnet/matrix.hpp"
#include "nullnet/polylog.hpp"

namespace nullnet {

enum class ModelKind { ecm, wcm };

inline std::string_view to_string(ModelKind kind) { return kind == ModelKind::ecm ? "ecm" : "wcm"; }

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "ecm" || s == "ECM") return ModelKind::ecm;
  if (s == "wcm" || s == "WCM") return ModelKind::wcm;
  throw InputError("unknown model kind '" + std::string(s) + "'");
}

struct FitDiagnostics {
  int iterations = 0;
  double max_degree_residual = 0.0;
  double max_strength_residual = 0.0;  // relative, |<s_i> - s_i| / max(s_i, 1)
  double log_likelihood = 0.0;
  bool converged = false;
  std::vector<std::string> boundary_nodes;  // parameters pushed towards x -> inf or y -> 0, 1
};

/// Fitted Lagrange multipliers. For the WCM all x_i are exactly 1. The
/// weight distribution is normalisable iff y_i y_j < 1 for every pair.
struct ModelParams {
  ModelKind kind = ModelKind::ecm;
  std::vector<std::string> nodes;
  std::vector<double> x;
  std::vector<double> y;
  FitDiagnostics diagnostics;

  std::size_t size() const noexcept { return y.size(); }

  void validate() const {
    if (x.size() != y.size() || nodes.size() != y.size())
      throw InputError("model parameters have inconsistent lengths");
    double largest = 0.0, runner_up = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!(x[i] >= 0.0) || !std::isfinite(x[i])) throw InputError("x must be finite and non-negative");
      if (!(y[i] >= 0.0) || !std::isfinite(y[i])) throw InputError("y must be finite and non-negative");
      if (kind == ModelKind::wcm && x[i] != 1.0) throw InputError("WCM parameters must have x = 1");
      if (y[i] > largest) {
        runner_up = largest;
        largest = y[i];
      } else if (y[i] > runner_up) {
        runner_up = y[i];
      }
    }
    if (!(largest * runner_up < 1.0)) throw InputError("y_i y_j must stay below 1 for every pair");
  }
};

/// Products u = x_i x_j and v = y_i y_j of one node pair.
struct PairState {
  double u;
  double v;

  double link_probability() const noexcept {
    const double uv = u * v;
    return uv == 0.0 ? 0.0 : uv / (1.0 - v + uv);
  }
  double mean_weight() const noexcept { return link_probability() / (1.0 - v); }
  /// Probability that an existing link gains one more unit.
  double continuation() const noexcept { return v; }

  double pmf(std::int64_t w) const noexcept {
    if (w < 0) return 0.0;
    const double denom = 1.0 - v + u * v;
    if (w == 0) return (1.0 - v) / denom;
    return u * std::pow(v, static_cast<double>(w)) * (1.0 - v) / denom;
  }

  double log_pmf(std::int64_t w) const noexcept {
    const double log_denom = std::log(1.0 - v + u * v);
    if (w == 0) return std::log1p(-v) - log_denom;
    return std::log(u) + static_cast<double>(w) * std::log(v) + std::log1p(-v) - log_denom;
  }

  /// <w^gamma> = u (1 - v) Li_{-gamma}(v) / (1 - v + u v)
  double mean_weight_power(double gamma) const {
    if (u == 0.0 || v == 0.0) return 0.0;
    return u * (1.0 - v) * polylog_negative_order(gamma, v) / (1.0 - v + u * v);
  }
};

inline PairState pair_state(const ModelParams& params, std::size_t i, std::size_t j) {
  if (i == j) throw DomainError("pair functions need two distinct nodes");
  if (i >= params.size() || j >= params.size()) throw DomainError("node index out of range");
  return {params.x[i] * params.x[j], params.y[i] * params.y[j]};
}

inline double pair_pmf(const ModelParams& params, std::size_t i, std::size_t j, std::int64_t w) {
  if (w < 0) throw DomainError("weights are non-negative");
  return pair_state(params, i, j).pmf(w);
}

inline double connection_probability(const ModelParams& params, std::size_t i, std::size_t j) {
  return pair_state(params, i, j).link_probability();
}

inline double expected_weight(const ModelParams& params, std::size_t i, std::size_t j) {
  return pair_state(params, i, j).mean_weight();
}

inline double expected_weight_power(const ModelParams& params, std::size_t i, std::size_t j, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  return pair_state(params, i, j).mean_weight_power(gamma);
}

/// Dense pair matrices (zero diagonal) for callers that reuse them, e.g. the
/// O(N^3) expected statistics.
struct PairMatrices {
  SquareMatrix<double> link_probability;
  SquareMatrix<double> mean_weight;
  SquareMatrix<double> mean_cube_root;  // <w^{1/3}>, only when requested
};

inline PairMatrices build_pair_matrices(const ModelParams& params, bool with_cube_root = true) {
  const std::size_t n = params.size();
  PairMatrices m{SquareMatrix<double>(n), SquareMatrix<double>(n),
                 with_cube_root ? SquareMatrix<double>(n) : SquareMatrix<double>()};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const PairState st = pair_state(params, i, j);
      m.link_probability(i, j) = m.link_probability(j, i) = st.link_probability();
      m.mean_weight(i, j) = m.mean_weight(j, i) = st.mean_weight();
      if (with_cube_root) m.mean_cube_root(i, j) = m.mean_cube_root(j, i) = st.mean_weight_power(1.0 / 3.0);
    }
  }
  return m;
}

// JSON: {kind, nodes[], x[], y[], diagnostics{}}

inline void to_json(nlohmann::json& j, const FitDiagnostics& d) {
  j = nlohmann::json{{"iterations", d.iterations},
                     {"max_degree_residual", d.max_degree_residual},
                     {"max_strength_residual", d.max_strength_residual},
                     {"log_likelihood", d.log_likelihood},
                     {"converged", d.converged},
                     {"boundary_nodes", d.boundary_nodes}};
}

inline void from_json(const nlohmann::json& j, FitDiagnostics& d) {
  d = FitDiagnostics{};
  d.iterations = j.value("iterations", 0);
  d.max_degree_residual = j.value("max_degree_residual", 0.0);
  d.max_strength_residual = j.value("max_strength_residual", 0.0);
  d.log_likelihood = j.value("log_likelihood", 0.0);
  d.converged = j.value("converged", false);
  d.boundary_nodes = j.value("boundary_nodes", std::vector<std::string>{});
}

inline void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"kind", to_string(p.kind)},
                     {"nodes", p.nodes},
                     {"x", p.x},
                     {"y", p.y},
                     {"diagnostics", p.diagnostics}};
}

inline void from_json(const nlohmann::json& j, ModelParams& p) {
  p.kind = parse_model_kind(j.at("kind").get<std::string>());
  p.nodes = j.at("nodes").get<std::vector<std::string>>();
  p.x = j.at("x").get<std::vector<double>>();
  p.y = j.at("y").get<std::vector<double>>();
  p.diagnostics = j.contains("diagnostics") ? j.at("diagnostics").get<FitDiagnostics>() : FitDiagnostics{};
  p.validate();
}

}  // namespace nullnet
