#pragma once

// Polylogarithm of non-positive order, Li_{-g}(z) = sum_{l>=1} l^g z^l, on [0, 1).

#include <cmath>
#include <limits>
#include <string>

#include "nullnet/errors.hpp"

namespace nullnet {

namespace polylog_detail {

/// Above this argument the ln(z) expansion replaces direct summation.
inline constexpr double kSeriesLimit = 0.9;

/// Direct summation. Stops once the geometric bound on the remaining tail,
/// term * r / (1 - r) with r = z ((l+1)/l)^g, drops below `rel_tol` of the
/// partial sum; r is non-increasing in l so the bound holds for the whole tail.
inline double series(double gamma, double z, double rel_tol = 1e-17) {
  if (z == 0.0) return 0.0;
  const double log_z = std::log(z);
  double sum = 0.0;
  double carry = 0.0;  // Neumaier compensation
  for (long l = 1;; ++l) {
    const double ld = static_cast<double>(l);
    const double term = std::exp(gamma * std::log(ld) + ld * log_z);
    const double t = sum + term;
    carry += std::abs(sum) >= term ? (sum - t) + term : (term - t) + sum;
    sum = t;
    const double ratio = z * std::pow((ld + 1.0) / ld, gamma);
    if (ratio < 1.0 && term * ratio / (1.0 - ratio) <= rel_tol * (sum + carry)) break;
    if (term == 0.0) break;
  }
  return sum + carry;
}

/// Expansion around z = 1 in mu = ln z, valid for |mu| < 2 pi:
///   Li_s(e^mu) = Gamma(1 - s) (-mu)^(s - 1) + sum_k zeta(s - k) mu^k / k!
/// with s = -gamma. Converges like (|mu| / 2 pi)^k.
inline double near_one(double gamma, double z) {
  const double mu = std::log(z);
  const double s = -gamma;
  double sum = std::tgamma(1.0 + gamma) * std::pow(-mu, s - 1.0);
  double power = 1.0;  // mu^k / k!
  int negligible = 0;  // zeta vanishes at negative even integers, so one tiny term is not enough
  for (int k = 0; k < 200; ++k) {
    const double term = std::riemann_zeta(s - k) * power;
    sum += term;
    negligible = std::abs(term) <= 1e-17 * std::abs(sum) ? negligible + 1 : 0;
    if (k >= 2 && negligible >= 2) break;
    power *= mu / (k + 1);
  }
  return sum;
}

}  // namespace polylog_detail

/// Li_{-gamma}(z) for gamma >= 0 and 0 <= z < 1, to about 1e-13 relative.
inline double polylog_negative_order(double gamma, double z) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw DomainError("polylog order must be a finite non-negative number");
  if (!(z >= 0.0) || !(z < 1.0))
    throw DomainError("polylog argument " + std::to_string(z) + " outside [0, 1)");
  if (z == 0.0) return 0.0;
  if (z <= polylog_detail::kSeriesLimit) return polylog_detail::series(gamma, z);
  return polylog_detail::near_one(gamma, z);
}

}  // namespace nullnet
