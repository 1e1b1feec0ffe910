#pragma once

// Maximum-likelihood fitting of ECM / WCM multipliers.
//
// The likelihood is an exponential family in the natural parameters
// (ln x_i, ln y_i), so it is concave there and its gradient is
// (k_i - <k_i>, s_i - <s_i>). The solver runs damped Newton steps on the
// Fisher information with a backtracking line search that keeps every
// product y_i y_j strictly below 1, and falls back to gradient ascent when the Newton
// direction does not improve the likelihood.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nullnet/errors.hpp"
#include "nullnet/graph.hpp"
#include "nullnet/models.hpp"

namespace nullnet {

struct FitConfig {
  int max_iterations = 10000;
  double degree_tolerance = 1e-6;    // absolute, in link counts
  double strength_tolerance = 1e-6;  // relative to max(s_i, 1)
  double damping = 1.0;              // initial Newton step fraction, in (0, 1]
  bool deterministic_init = true;

  void validate() const {
    if (max_iterations < 1) throw InputError("max_iterations must be >= 1");
    if (!(degree_tolerance > 0.0) || !(strength_tolerance > 0.0)) throw InputError("tolerances must be positive");
    if (!(damping > 0.0) || damping > 1.0) throw InputError("damping must lie in (0, 1]");
    if (!deterministic_init) throw InputError("only the deterministic initialisation is available");
  }
};

struct TracePoint {
  int iteration;
  double max_degree_residual;
  double max_strength_residual;
  double log_likelihood;
};

/// Raised when the solver stops without meeting the tolerances. Carries the
/// best parameters found, with their residuals in `best.diagnostics`.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, ModelParams best) : std::runtime_error(what), best_(std::move(best)) {}
  const ModelParams& best() const noexcept { return best_; }

 private:
  ModelParams best_;
};

struct NodeResiduals {
  std::vector<double> degree;    // <k_i> - k_i
  std::vector<double> strength;  // <s_i> - s_i
};

struct LikelihoodGradient {
  std::vector<double> d_log_x;  // k_i - <k_i>
  std::vector<double> d_log_y;  // s_i - <s_i>
};

namespace solver_detail {

inline void check_dimensions(const ModelParams& params, const WeightedGraph& graph) {
  if (params.size() != graph.size() || params.x.size() != graph.size())
    throw InputError("model has " + std::to_string(params.size()) + " nodes but graph has " +
                     std::to_string(graph.size()));
}

inline double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
inline double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// Likelihood restricted to non-isolated nodes, in natural coordinates.
/// theta = [ln x (ECM only); ln y].
class NaturalProblem {
 public:
  NaturalProblem(const WeightedGraph& graph, ModelKind kind) : kind_(kind) {
    const auto c = local_constraints(graph);
    for (std::size_t i = 0; i < graph.size(); ++i) {
      if (!c.isolated(i)) {
        active_.push_back(i);
        degree_.push_back(static_cast<double>(c.degrees[i]));
        strength_.push_back(static_cast<double>(c.strengths[i]));
      }
    }
    const std::size_t n = active_.size();
    observed_ = SquareMatrix<Weight>(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) observed_(a, b) = graph.weight(active_[a], active_[b]);
  }

  std::size_t nodes() const noexcept { return active_.size(); }
  std::size_t dimension() const noexcept { return kind_ == ModelKind::ecm ? 2 * nodes() : nodes(); }
  const std::vector<std::size_t>& active() const noexcept { return active_; }
  const std::vector<double>& degrees() const noexcept { return degree_; }
  const std::vector<double>& strengths() const noexcept { return strength_; }
  bool fits_degrees() const noexcept { return kind_ == ModelKind::ecm; }

  double log_x(const Eigen::VectorXd& theta, std::size_t a) const {
    return fits_degrees() ? theta[static_cast<Eigen::Index>(a)] : 0.0;
  }
  double log_y(const Eigen::VectorXd& theta, std::size_t a) const {
    return theta[static_cast<Eigen::Index>(fits_degrees() ? nodes() + a : a)];
  }

  Eigen::VectorXd initial_point() const {
    double sum_k = 0.0, sum_s = 0.0;
    for (std::size_t a = 0; a < nodes(); ++a) {
      sum_k += degree_[a];
      sum_s += strength_[a];
    }
    Eigen::VectorXd theta(dimension());
    for (std::size_t a = 0; a < nodes(); ++a) {
      const double t = strength_[a] / std::sqrt(sum_s);
      const double y = t / (1.0 + t);
      if (fits_degrees()) {
        theta[static_cast<Eigen::Index>(a)] = std::log(degree_[a] / std::sqrt(sum_k));
        theta[static_cast<Eigen::Index>(nodes() + a)] = std::log(y);
      } else {
        theta[static_cast<Eigen::Index>(a)] = std::log(y);
      }
    }
    return theta;
  }

  /// Normalisability needs y_i y_j < 1 for every pair, i.e. the two largest
  /// ln y must sum to a negative number. A single y_i may exceed 1.
  bool feasible(const Eigen::VectorXd& theta) const {
    double first = -std::numeric_limits<double>::infinity(), second = first;
    for (std::size_t a = 0; a < nodes(); ++a) {
      const double ly = log_y(theta, a);
      if (!std::isfinite(ly) || std::abs(ly) > 700.0) return false;
      if (std::abs(log_x(theta, a)) > 350.0) return false;
      if (ly > first) {
        second = first;
        first = ly;
      } else if (ly > second) {
        second = ly;
      }
    }
    return nodes() < 2 || first + second < 0.0;
  }

  /// ln y of the largest partner of node a.
  double max_partner_log_y(const Eigen::VectorXd& theta, std::size_t a) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < nodes(); ++b)
      if (b != a) best = std::max(best, log_y(theta, b));
    return best;
  }

  struct Evaluation {
    double log_likelihood = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd fisher;
  };

  Evaluation evaluate(const Eigen::VectorXd& theta, bool with_fisher) const {
    const std::size_t n = nodes();
    const bool ecm = fits_degrees();
    const Eigen::Index off = ecm ? static_cast<Eigen::Index>(n) : 0;
    Evaluation ev;
    ev.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension()));
    if (with_fisher) ev.fisher = Eigen::MatrixXd::Zero(ev.gradient.size(), ev.gradient.size());
    double ll = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double lu = log_x(theta, a) + log_x(theta, b);
        const double lv = log_y(theta, a) + log_y(theta, b);
        const double omv = -std::expm1(lv);
        const double t = lu + lv - std::log(omv);
        const double p = logistic(t);
        const double q = logistic(-t);
        const double mean_w = p / omv;
        const Weight w = observed_(a, b);
        ll += (w > 0 ? lu : 0.0) + static_cast<double>(w) * lv - softplus(t);

        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        const double link = w > 0 ? 1.0 : 0.0;
        if (ecm) {
          ev.gradient[ia] += link - p;
          ev.gradient[ib] += link - p;
        }
        ev.gradient[off + ia] += static_cast<double>(w) - mean_w;
        ev.gradient[off + ib] += static_cast<double>(w) - mean_w;

        if (with_fisher) {
          auto& f = ev.fisher;
          const double var_w = mean_w * (1.0 + (1.0 - omv) - p) / omv;
          f(off + ia, off + ia) += var_w;
          f(off + ib, off + ib) += var_w;
          f(off + ia, off + ib) += var_w;
          f(off + ib, off + ia) += var_w;
          if (ecm) {
            const double var_a = p * q;
            const double cov = mean_w * q;
            f(ia, ia) += var_a;
            f(ib, ib) += var_a;
            f(ia, ib) += var_a;
            f(ib, ia) += var_a;
            for (auto r : {ia, ib}) {
              for (auto c : {ia, ib}) {
                f(r, off + c) += cov;
                f(off + c, r) += cov;
              }
            }
          }
        }
      }
    }
    ev.log_likelihood = ll;
    return ev;
  }

  /// Largest absolute degree residual and largest relative strength residual.
  std::pair<double, double> max_residuals(const Eigen::VectorXd& gradient) const {
    double dk = 0.0, ds = 0.0;
    const std::size_t n = nodes();
    for (std::size_t a = 0; a < n; ++a) {
      if (fits_degrees()) dk = std::max(dk, std::abs(gradient[static_cast<Eigen::Index>(a)]));
      const auto is = static_cast<Eigen::Index>(fits_degrees() ? n + a : a);
      ds = std::max(ds, std::abs(gradient[is]) / std::max(strength_[a], 1.0));
    }
    return {dk, ds};
  }

 private:
  ModelKind kind_;
  std::vector<std::size_t> active_;
  std::vector<double> degree_;
  std::vector<double> strength_;
  SquareMatrix<Weight> observed_;
};

/// Solves (F + lambda diag F) d = g on the Jacobi-scaled system, so that the
/// conditioning tests do not mix the degree block (curvature ~ p(1 - p)) with
/// the much stiffer strength block. Ill-conditioned systems (unidentified
/// directions such as the x_1 x_2 gauge at N = 2) use the eigen pseudo-inverse
/// so that null directions get no step.
inline std::optional<Eigen::VectorXd> newton_direction(const Eigen::MatrixXd& fisher, const Eigen::VectorXd& g,
                                                       double lambda) {
  const Eigen::VectorXd scale = fisher.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd lhs = scale.asDiagonal() * fisher * scale.asDiagonal();
  lhs.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = scale.cwiseProduct(g);
  auto accept = [&](const Eigen::VectorXd& z) -> std::optional<Eigen::VectorXd> {
    Eigen::VectorXd d = scale.cwiseProduct(z);
    if (!d.allFinite() || !(g.dot(d) > 0.0)) return std::nullopt;
    return d;
  };
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  const bool well_conditioned =
      ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 1e-10 * ldlt.vectorD().cwiseAbs().maxCoeff();
  if (well_conditioned && ldlt.rcond() > 1e-10)
    if (auto d = accept(ldlt.solve(rhs))) return d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lhs);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double cutoff = 1e-12 * values.cwiseAbs().maxCoeff();
  const Eigen::VectorXd coeffs = eig.eigenvectors().transpose() * rhs;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(coeffs.size());
  for (Eigen::Index k = 0; k < coeffs.size(); ++k)
    if (values[k] > cutoff) z[k] = coeffs[k] / values[k];
  return accept(eig.eigenvectors() * z);
}

}  // namespace solver_detail

inline double log_likelihood(const ModelParams& params, const WeightedGraph& graph) {
  solver_detail::check_dimensions(params, graph);
  double ll = 0.0;
  for (std::size_t i = 0; i < graph.size(); ++i)
    for (std::size_t j = i + 1; j < graph.size(); ++j) ll += pair_state(params, i, j).log_pmf(graph.weight(i, j));
  return ll;
}

inline NodeResiduals residuals(const ModelParams& params, const WeightedGraph& graph) {
  solver_detail::check_dimensions(params, graph);
  const std::size_t n = graph.size();
  const auto c = local_constraints(graph);
  NodeResiduals r{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto st = pair_state(params, i, j);
      const double p = st.link_probability();
      const double m = st.mean_weight();
      r.degree[i] += p;
      r.degree[j] += p;
      r.strength[i] += m;
      r.strength[j] += m;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    r.degree[i] -= static_cast<double>(c.degrees[i]);
    r.strength[i] -= static_cast<double>(c.strengths[i]);
  }
  return r;
}

/// Gradient of the log-likelihood with respect to ln x_i and ln y_i.
inline LikelihoodGradient likelihood_gradient(const ModelParams& params, const WeightedGraph& graph) {
  const auto r = residuals(params, graph);
  LikelihoodGradient g{r.degree, r.strength};
  for (auto& v : g.d_log_x) v = -v;
  for (auto& v : g.d_log_y) v = -v;
  return g;
}

inline ModelParams fit(const WeightedGraph& graph, ModelKind kind, const FitConfig& config = {},
                       std::vector<TracePoint>* trace = nullptr) {
  config.validate();
  using solver_detail::NaturalProblem;
  const NaturalProblem problem(graph, kind);
  const std::size_t n_active = problem.nodes();
  const bool ecm = kind == ModelKind::ecm;

  ModelParams params;
  params.kind = kind;
  params.nodes = graph.nodes();
  params.x.assign(graph.size(), ecm ? 0.0 : 1.0);
  params.y.assign(graph.size(), 0.0);

  auto export_params = [&](const Eigen::VectorXd& theta) {
    for (std::size_t a = 0; a < n_active; ++a) {
      const std::size_t i = problem.active()[a];
      if (ecm) params.x[i] = std::exp(problem.log_x(theta, a));
      params.y[i] = std::exp(problem.log_y(theta, a));
    }
  };

  // The two criteria are checked in natural coordinates with some slack so
  // that the residuals recomputed from (x, y) still meet the tolerances.
  const double slack = 0.5;
  auto converged = [&](std::pair<double, double> res) {
    return (!ecm || res.first <= slack * config.degree_tolerance) &&
           res.second <= slack * config.strength_tolerance;
  };

  Eigen::VectorXd theta = n_active > 0 ? problem.initial_point() : Eigen::VectorXd();
  auto ev = problem.evaluate(theta, true);
  auto res = problem.max_residuals(ev.gradient);
  int iteration = 0;
  bool done = n_active == 0 || converged(res);
  bool stalled = false;
  if (trace) trace->push_back({0, res.first, res.second, ev.log_likelihood});

  while (!done && iteration < config.max_iterations) {
    ++iteration;
    const Eigen::VectorXd& g = ev.gradient;

    const Eigen::VectorXd diag = ev.fisher.diagonal().cwiseMax(1e-300);
    auto line_search = [&](const Eigen::VectorXd& d, double start) -> bool {
      const double cap = 10.0 / std::max(d.cwiseAbs().maxCoeff(), 1e-300);
      const double slope = g.dot(d);
      for (double t = std::min(start, cap); t > 1e-14; t *= 0.5) {
        Eigen::VectorXd next = theta + t * d;
        if (!problem.feasible(next)) continue;
        auto nev = problem.evaluate(next, false);
        if (!std::isfinite(nev.log_likelihood)) continue;
        const double gain = nev.log_likelihood - ev.log_likelihood;
        // Near the optimum the likelihood gain falls below rounding; accept a
        // step that reduces the gradient without a measurable likelihood loss.
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(ev.log_likelihood);
        const bool armijo = gain >= 1e-4 * t * slope;
        const bool flat = gain >= -noise && nev.gradient.norm() < g.norm();
        if (armijo || flat) {
          theta = std::move(next);
          return true;
        }
      }
      return false;
    };

    // Plain Newton first, then Levenberg-damped variants, then scaled gradient.
    bool accepted = false;
    for (double lambda : {0.0, 1e-3, 1e-1, 10.0}) {
      if (auto dir = solver_detail::newton_direction(ev.fisher, g, lambda)) {
        accepted = line_search(*dir, lambda == 0.0 ? config.damping : 1.0);
        if (accepted) break;
      }
    }
    if (!accepted) accepted = line_search(g.cwiseQuotient(diag.cwiseMax(1e-12)), 1.0);
    if (!accepted) {
      stalled = true;
      break;
    }
    ev = problem.evaluate(theta, true);
    res = problem.max_residuals(ev.gradient);
    if (trace) trace->push_back({iteration, res.first, res.second, ev.log_likelihood});
    done = converged(res);
  }

  if (n_active > 0) export_params(theta);

  auto& d = params.diagnostics;
  d.iterations = iteration;
  const auto r = residuals(params, graph);
  const auto c = local_constraints(graph);
  d.max_degree_residual = 0.0;
  d.max_strength_residual = 0.0;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (ecm) d.max_degree_residual = std::max(d.max_degree_residual, std::abs(r.degree[i]));
    d.max_strength_residual = std::max(
        d.max_strength_residual, std::abs(r.strength[i]) / std::max(static_cast<double>(c.strengths[i]), 1.0));
  }
  d.log_likelihood = log_likelihood(params, graph);
  for (std::size_t a = 0; a < n_active; ++a) {
    const double lx = problem.log_x(theta, a), ly = problem.log_y(theta, a);
    const double lv_max = ly + problem.max_partner_log_y(theta, a);
    // Structural cases first: a node linked to every other active node has
    // x -> inf, one whose links all carry weight 1 has y -> 0.
    const bool full = ecm && problem.degrees()[a] == static_cast<double>(n_active - 1);
    const bool unit = ecm && problem.strengths()[a] == problem.degrees()[a];
    if (full || unit || std::abs(lx) > 15.0 || ly < -15.0 || lv_max > -1e-8)
      d.boundary_nodes.push_back(graph.nodes()[problem.active()[a]]);
  }
  d.converged = (!ecm || d.max_degree_residual <= config.degree_tolerance) &&
                d.max_strength_residual <= config.strength_tolerance;
  if (!d.converged) {
    throw FitError(std::string(to_string(kind)) + " fit did not converge after " + std::to_string(iteration) +
                       " iterations" + (stalled ? " (line search stalled)" : "") +
                       ": max degree residual " + std::to_string(d.max_degree_residual) +
                       ", max relative strength residual " + std::to_string(d.max_strength_residual),
                   params);
  }
  return params;
}

}  // namespace nullnet
