#pragma once

// Risk functionals on a Beta second-order posterior under symmetric 0/1 loss.

#include <algorithm>
#include <stdexcept>

#include "deal/distributions.hpp"

namespace deal {

struct RiskBreakdown {
  double point_risk;
  double expected_risk;
  double gap;
  double density;
  double tuv;
};

/// Conditional risk of the plug-in classifier: min(mean, 1 - mean).
inline double point_risk(const BetaParams& p) noexcept {
  const double q = beta_mean(p);
  return std::min(q, 1.0 - q);
}

/// Risk averaged over the second-order distribution, E[min(Q, 1 - Q)].
/// Never exceeds point_risk (min is concave).
inline double expected_risk(const BetaParams& p) { return expected_min(p); }

/// Training utility value: (point_risk - expected_risk) * density.
inline RiskBreakdown tuv(const BetaParams& p, double density) {
  if (!(density >= 0.0)) throw std::domain_error("tuv: density must be nonnegative");
  RiskBreakdown r{};
  r.point_risk = point_risk(p);
  r.expected_risk = expected_risk(p);
  // Rounding can push the difference a few ulps below zero for very peaked Betas.
  r.gap = std::max(0.0, r.point_risk - r.expected_risk);
  r.density = density;
  r.tuv = r.gap * density;
  return r;
}

}  // namespace deal
