#pragma once

// Gaussian kernel density classifier with Beta second-order posteriors.
//
// Evidence for class y at x is the kernel-weighted count
//   k_y(x) = 2^{d/2} * sum_{i : y_i = y} exp(-|x - x_i|^2 / (2 h^2)),
// i.e. n_y * p(x|y) / C2 for the Parzen estimate p(x|y). With a Gamma model of
// each class-weighted density the posterior p(+1|x) is Beta(delta + k_+, delta + k_-).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "deal/distributions.hpp"

namespace deal {

enum class Label : int { negative = -1, positive = 1 };

inline Label flip(Label y) noexcept {
  return y == Label::positive ? Label::negative : Label::positive;
}

inline int to_int(Label y) noexcept { return static_cast<int>(y); }

using FeatureVector = std::span<const double>;

struct LabeledPoint {
  std::vector<double> x;
  Label y;
};

/// C2 = integral of K^2 for the normalized isotropic Gaussian: (2 h sqrt(pi))^{-d}.
inline double gaussian_c2(std::size_t d, double h) {
  if (d == 0) throw std::domain_error("gaussian_c2: dimension must be >= 1");
  if (!(h > 0.0)) throw std::domain_error("gaussian_c2: bandwidth must be positive");
  return std::pow(2.0 * h * std::sqrt(std::numbers::pi), -static_cast<double>(d));
}

struct KernelConfig {
  double bandwidth;
  std::size_t dimension;
  double delta;
  double c2;

  KernelConfig(double h, std::size_t d, double regularizer = 0.5)
      : bandwidth(h), dimension(d), delta(regularizer), c2(gaussian_c2(d, h)) {
    if (!(regularizer > 0.0)) throw std::domain_error("KernelConfig: delta must be positive");
  }

  // 2^{d/2}; the peak contribution of one labeled point to k_y.
  double evidence_scale() const noexcept {
    return std::pow(2.0, static_cast<double>(dimension) / 2.0);
  }
};

struct ClassEvidence {
  double k_pos = 0.0;
  double k_neg = 0.0;

  double& operator[](Label y) noexcept { return y == Label::positive ? k_pos : k_neg; }
  double operator[](Label y) const noexcept {
    return y == Label::positive ? k_pos : k_neg;
  }
};

/// Normal reference bandwidth h = s * m^{-1/(d+4)}, s the geometric mean of the
/// per-dimension standard deviations.
inline double normal_reference_bandwidth(std::size_t pool_size, std::size_t d,
                                         std::span<const double> per_dim_std) {
  if (pool_size < 2) throw std::domain_error("normal_reference_bandwidth: need m >= 2");
  if (d == 0 || per_dim_std.size() != d) {
    throw std::domain_error("normal_reference_bandwidth: std vector must have d entries");
  }
  double log_sum = 0.0;
  for (double s : per_dim_std) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::domain_error("normal_reference_bandwidth: zero-variance dimension");
    }
    log_sum += std::log(s);
  }
  const double sigma = std::exp(log_sum / static_cast<double>(d));
  return sigma * std::pow(static_cast<double>(pool_size), -1.0 / (static_cast<double>(d) + 4.0));
}

inline double squared_distance(FeatureVector a, FeatureVector b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

/// One labeled point's contribution to k_y at x.
inline double evidence_weight(FeatureVector x, FeatureVector xi, const KernelConfig& cfg) {
  const double h2 = cfg.bandwidth * cfg.bandwidth;
  return cfg.evidence_scale() * std::exp(-squared_distance(x, xi) / (2.0 * h2));
}

inline void check_dimension(FeatureVector x, const KernelConfig& cfg) {
  if (x.size() != cfg.dimension) throw std::invalid_argument("dimension mismatch");
}

inline ClassEvidence evidence(FeatureVector x, std::span<const LabeledPoint> labeled,
                              const KernelConfig& cfg) {
  check_dimension(x, cfg);
  ClassEvidence ev;
  for (const auto& p : labeled) {
    check_dimension(p.x, cfg);
    ev[p.y] += evidence_weight(x, p.x, cfg);
  }
  return ev;
}

inline BetaParams second_order(const ClassEvidence& ev, const KernelConfig& cfg) {
  return BetaParams(cfg.delta + ev.k_pos, cfg.delta + ev.k_neg);
}

inline BetaParams second_order(FeatureVector x, std::span<const LabeledPoint> labeled,
                               const KernelConfig& cfg) {
  return second_order(evidence(x, labeled, cfg), cfg);
}

/// Parzen density (1/m) sum_i (2 pi h^2)^{-d/2} exp(-|x - x_i|^2 / (2 h^2)).
template <typename Pool>
double density_estimate(FeatureVector x, const Pool& pool, const KernelConfig& cfg) {
  check_dimension(x, cfg);
  std::size_t m = 0;
  double acc = 0.0;
  const double h2 = cfg.bandwidth * cfg.bandwidth;
  for (const auto& xi : pool) {
    acc += std::exp(-squared_distance(x, FeatureVector(xi)) / (2.0 * h2));
    ++m;
  }
  if (m == 0) throw std::invalid_argument("density_estimate: empty pool");
  const double norm =
      std::pow(2.0 * std::numbers::pi * h2, -static_cast<double>(cfg.dimension) / 2.0);
  return norm * acc / static_cast<double>(m);
}

inline double point_estimate(const ClassEvidence& ev, const KernelConfig& cfg) {
  return beta_mean(second_order(ev, cfg));
}

inline double point_estimate(FeatureVector x, std::span<const LabeledPoint> labeled,
                             const KernelConfig& cfg) {
  return point_estimate(evidence(x, labeled, cfg), cfg);
}

/// sgn(q - 1/2) with exact ties mapped to the negative class.
inline Label predict_from_estimate(double q) noexcept {
  return q > 0.5 ? Label::positive : Label::negative;
}

inline Label predict(const ClassEvidence& ev, const KernelConfig& cfg) {
  return predict_from_estimate(point_estimate(ev, cfg));
}

inline Label predict(FeatureVector x, std::span<const LabeledPoint> labeled,
                     const KernelConfig& cfg) {
  return predict(evidence(x, labeled, cfg), cfg);
}

/// Unregularized plug-in posterior k_+ / (k_+ + k_-), evaluated with log-sum-exp
/// so it stays informative far from every labeled point. Returns 1/2 when no
/// point is labeled, 1 or 0 when only one class is.
inline double parzen_posterior(FeatureVector x, std::span<const LabeledPoint> labeled,
                               const KernelConfig& cfg) {
  check_dimension(x, cfg);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const double inv_2h2 = 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth);
  double max_log[2] = {neg_inf, neg_inf};
  for (const auto& p : labeled) {
    const int c = p.y == Label::positive ? 1 : 0;
    max_log[c] = std::max(max_log[c], -squared_distance(x, p.x) * inv_2h2);
  }
  if (max_log[0] == neg_inf && max_log[1] == neg_inf) return 0.5;
  if (max_log[0] == neg_inf) return 1.0;
  if (max_log[1] == neg_inf) return 0.0;
  double sum[2] = {0.0, 0.0};
  for (const auto& p : labeled) {
    const int c = p.y == Label::positive ? 1 : 0;
    sum[c] += std::exp(-squared_distance(x, p.x) * inv_2h2 - max_log[c]);
  }
  const double log_pos = max_log[1] + std::log(sum[1]);
  const double log_neg = max_log[0] + std::log(sum[0]);
  // logistic of the log-evidence difference
  return 1.0 / (1.0 + std::exp(log_neg - log_pos));
}

}  // namespace deal
