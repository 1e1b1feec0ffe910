#pragma once

// Information-criterion comparison of the ECM (2N parameters) against the
// WCM (N parameters).

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "nullnet/errors.hpp"
#include "nullnet/models.hpp"

namespace nullnet {

inline std::size_t parameter_count(ModelKind kind, std::size_t nodes) {
  return kind == ModelKind::ecm ? 2 * nodes : nodes;
}

/// Size-corrected AIC:
///   ECM: -2L + 4N + 8N(2N+1) / (N^2 - 5N - 2)
///   WCM: -2L + 2N + 4N(N+1) / (N^2 - 3N - 2)
inline double aic_c(double log_lik, ModelKind kind, std::size_t nodes) {
  const double n = static_cast<double>(nodes);
  if (kind == ModelKind::ecm) {
    const double den = n * n - 5.0 * n - 2.0;
    if (!(den > 0.0)) throw DomainError("ECM AICc needs N >= 6 nodes");
    return -2.0 * log_lik + 4.0 * n + 8.0 * n * (2.0 * n + 1.0) / den;
  }
  const double den = n * n - 3.0 * n - 2.0;
  if (!(den > 0.0)) throw DomainError("WCM AICc needs N >= 4 nodes");
  return -2.0 * log_lik + 2.0 * n + 4.0 * n * (n + 1.0) / den;
}

/// BIC with the dyad count N(N-1)/2 as sample size, matching the factorisation
/// of the likelihood over node pairs.
inline double bic(double log_lik, ModelKind kind, std::size_t nodes) {
  if (nodes < 2) throw DomainError("BIC needs at least two nodes");
  const double dyads = static_cast<double>(nodes) * static_cast<double>(nodes - 1) / 2.0;
  return static_cast<double>(parameter_count(kind, nodes)) * std::log(dyads) - 2.0 * log_lik;
}

struct CriterionWeights {
  double ecm;
  double wcm;
};

/// exp(-c/2) weights of two criterion values, shifted by the smaller value so
/// that large differences saturate to {0, 1} instead of underflowing.
inline CriterionWeights information_weights(double criterion_ecm, double criterion_wcm) {
  if (!std::isfinite(criterion_ecm) || !std::isfinite(criterion_wcm))
    throw DomainError("information criteria must be finite");
  const double best = std::min(criterion_ecm, criterion_wcm);
  const double a = std::exp(-(criterion_ecm - best) / 2.0);
  const double b = std::exp(-(criterion_wcm - best) / 2.0);
  const double w_ecm = a / (a + b);
  return {w_ecm, 1.0 - w_ecm};
}

struct ModelScore {
  ModelKind kind;
  double log_likelihood;
  std::size_t parameters;
  double aic_c;
  double bic;
};

struct ModelComparison {
  std::size_t nodes;
  ModelScore ecm;
  ModelScore wcm;
  CriterionWeights aic_c_weights;
  CriterionWeights bic_weights;
};

/// Relative slack allowed when checking L_ECM >= L_WCM between two fits that
/// each meet their tolerances only approximately.
inline constexpr double kNestingSlack = 1e-9;

inline bool nesting_holds(double log_lik_ecm, double log_lik_wcm) {
  return log_lik_ecm >= log_lik_wcm - kNestingSlack * std::max(1.0, std::abs(log_lik_wcm));
}

inline ModelComparison compare_models(double log_lik_ecm, double log_lik_wcm, std::size_t nodes) {
  if (!nesting_holds(log_lik_ecm, log_lik_wcm))
    throw DomainError("ECM log-likelihood " + std::to_string(log_lik_ecm) + " is below the nested WCM value " +
                      std::to_string(log_lik_wcm));
  auto score = [nodes](ModelKind kind, double ll) {
    return ModelScore{kind, ll, parameter_count(kind, nodes), aic_c(ll, kind, nodes), bic(ll, kind, nodes)};
  };
  ModelComparison c{nodes, score(ModelKind::ecm, log_lik_ecm), score(ModelKind::wcm, log_lik_wcm), {}, {}};
  c.aic_c_weights = information_weights(c.ecm.aic_c, c.wcm.aic_c);
  c.bic_weights = information_weights(c.ecm.bic, c.wcm.bic);
  return c;
}

inline void to_json(nlohmann::json& j, const ModelScore& s) {
  j = nlohmann::json{{"model", to_string(s.kind)},
                     {"log_likelihood", s.log_likelihood},
                     {"parameters", s.parameters},
                     {"aic_c", s.aic_c},
                     {"bic", s.bic}};
}

inline void to_json(nlohmann::json& j, const ModelComparison& c) {
  j = nlohmann::json{{"nodes", c.nodes},
                     {"bic_sample_size", "dyads N(N-1)/2"},
                     {"ecm", c.ecm},
                     {"wcm", c.wcm},
                     {"w_aic_c", {{"ecm", c.aic_c_weights.ecm}, {"wcm", c.aic_c_weights.wcm}}},
                     {"w_bic", {{"ecm", c.bic_weights.ecm}, {"wcm", c.bic_weights.wcm}}}};
}

}  // namespace nullnet
