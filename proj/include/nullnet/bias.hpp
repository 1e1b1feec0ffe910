#pragma once

// Extensive / intensive bias of node pairs under a fitted ECM.
//
// The product x_i x_j compares the probability of creating a unit link, p_ij,
// with the probability y_i y_j of reinforcing an existing one: x_i x_j > 1
// iff p_ij > y_i y_j. The bias is a property of the pair only.

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nullnet/errors.hpp"
#include "nullnet/models.hpp"

namespace nullnet {

enum class BiasClass { extensive, intensive, neutral };

inline std::string_view to_string(BiasClass c) {
  switch (c) {
    case BiasClass::extensive: return "extensive";
    case BiasClass::intensive: return "intensive";
    case BiasClass::neutral: return "neutral";
  }
  return "?";
}

inline double pair_bias(const ModelParams& params, std::size_t i, std::size_t j) {
  if (params.kind != ModelKind::ecm)
    throw DomainError("pair bias needs ECM parameters; the WCM is neutral by construction");
  return pair_state(params, i, j).u;
}

/// Default neutrality band, relative to 1.
inline constexpr double kDefaultNeutralTolerance = 1e-9;

inline BiasClass classify_bias(double bias, double tolerance = kDefaultNeutralTolerance) {
  if (bias > 1.0 + tolerance) return BiasClass::extensive;
  if (bias < 1.0 - tolerance) return BiasClass::intensive;
  return BiasClass::neutral;
}

struct PairBias {
  std::size_t i;
  std::size_t j;
  double bias;
  BiasClass cls;
};

struct BiasReport {
  std::vector<std::string> nodes;
  std::vector<PairBias> pairs;  // classified pairs, i < j
  std::size_t extensive = 0;
  std::size_t intensive = 0;
  std::size_t neutral = 0;
  std::size_t excluded = 0;  // pairs with an isolated endpoint
  double tolerance = kDefaultNeutralTolerance;

  std::size_t classified() const noexcept { return extensive + intensive + neutral; }
  double fraction(BiasClass c) const noexcept {
    const auto total = classified();
    if (total == 0) return 0.0;
    const auto count = c == BiasClass::extensive ? extensive : c == BiasClass::intensive ? intensive : neutral;
    return static_cast<double>(count) / static_cast<double>(total);
  }
};

inline BiasReport bias_report(const ModelParams& params, double tolerance = kDefaultNeutralTolerance) {
  if (params.kind != ModelKind::ecm) throw DomainError("bias report needs ECM parameters");
  if (!(tolerance >= 0.0)) throw DomainError("neutrality tolerance must be non-negative");
  BiasReport report;
  report.nodes = params.nodes;
  report.tolerance = tolerance;
  const std::size_t n = params.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (params.x[i] == 0.0 || params.x[j] == 0.0) {
        ++report.excluded;
        continue;
      }
      const double b = pair_bias(params, i, j);
      const auto cls = classify_bias(b, tolerance);
      report.pairs.push_back({i, j, b, cls});
      switch (cls) {
        case BiasClass::extensive: ++report.extensive; break;
        case BiasClass::intensive: ++report.intensive; break;
        case BiasClass::neutral: ++report.neutral; break;
      }
    }
  }
  return report;
}

inline void to_json(nlohmann::json& j, const BiasReport& r) {
  j = nlohmann::json{{"tolerance", r.tolerance},
                     {"classified_pairs", r.classified()},
                     {"excluded_pairs", r.excluded},
                     {"extensive", r.extensive},
                     {"intensive", r.intensive},
                     {"neutral", r.neutral},
                     {"fraction_extensive", r.fraction(BiasClass::extensive)},
                     {"fraction_intensive", r.fraction(BiasClass::intensive)},
                     {"fraction_neutral", r.fraction(BiasClass::neutral)},
                     {"note", "class fractions are a summary convenience, not a model quantity"}};
}

}  // namespace nullnet
