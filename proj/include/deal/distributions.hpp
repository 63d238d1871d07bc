#pragma once

// Beta/Gamma primitives for second-order posterior estimates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace deal {

/// Shape parameters of a Beta(alpha, beta) distribution over a class posterior.
struct BetaParams {
  double alpha;
  double beta;

  BetaParams(double a, double b) : alpha(a), beta(b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw std::domain_error("BetaParams: shapes must be positive and finite");
    }
  }
};

struct GammaParams {
  double shape;
  double scale;

  GammaParams(double k, double theta) : shape(k), scale(theta) {
    if (!(k > 0.0) || !(theta > 0.0)) {
      throw std::domain_error("GammaParams: shape and scale must be positive");
    }
  }
};

/// A second-order distribution with finitely many atoms. Used to exercise the
/// degenerate cases (point masses at 0, 1 or 1/2) no Beta can reach.
class DiscreteSecondOrder {
 public:
  struct Atom {
    double q;
    double mass;
  };

  explicit DiscreteSecondOrder(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    double total = 0.0;
    for (const auto& a : atoms_) {
      if (!(a.q >= 0.0 && a.q <= 1.0)) {
        throw std::domain_error("DiscreteSecondOrder: atom location outside [0,1]");
      }
      if (!(a.mass >= 0.0)) {
        throw std::domain_error("DiscreteSecondOrder: negative mass");
      }
      total += a.mass;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::domain_error("DiscreteSecondOrder: masses must sum to 1");
    }
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }

  double mean() const noexcept {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.q * a.mass;
    return m;
  }

 private:
  std::vector<Atom> atoms_;
};

namespace detail {

inline double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
// Converges quickly for x < (a+1)/(a+b+2).
inline double beta_continued_fraction(double x, double a, double b) {
  constexpr int max_iter = 10000;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(alpha, beta): the Beta CDF at x.
inline double reg_inc_beta(double x, const BetaParams& p) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("reg_inc_beta: x must lie in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double a = p.alpha;
  const double b = p.beta;
  const double log_front =
      a * std::log(x) + b * std::log1p(-x) - detail::log_beta_fn(a, b);
  const double front = std::exp(log_front);
  double result;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    result = front * detail::beta_continued_fraction(x, a, b) / a;
  } else {
    result = 1.0 - front * detail::beta_continued_fraction(1.0 - x, b, a) / b;
  }
  return std::clamp(result, 0.0, 1.0);
}

inline double beta_mean(const BetaParams& p) noexcept {
  return p.alpha / (p.alpha + p.beta);
}

/// E[min(Q, 1-Q)] for Q ~ Beta(alpha, beta), in closed form:
///   alpha/(a+b) * I_{1/2}(a+1, b) + beta/(a+b) * (1 - I_{1/2}(a, b+1)).
/// The first term is E[Q; Q < 1/2], the second E[1-Q; Q >= 1/2].
inline double expected_min(const BetaParams& p) {
  const double a = p.alpha;
  const double b = p.beta;
  const double lower = reg_inc_beta(0.5, BetaParams(a + 1.0, b));
  const double upper = 1.0 - reg_inc_beta(0.5, BetaParams(a, b + 1.0));
  const double m = a / (a + b);
  // Jensen bound; the two incomplete betas can overshoot it by a few ulps.
  return std::clamp((a * lower + b * upper) / (a + b), 0.0, std::min(m, 1.0 - m));
}

inline double discrete_expected_min(const DiscreteSecondOrder& d) noexcept {
  double acc = 0.0;
  for (const auto& a : d.atoms()) acc += a.mass * std::min(a.q, 1.0 - a.q);
  return acc;
}

/// n i.i.d. Gamma(shape, scale) draws. Deterministic for a given seed and
/// standard library; the sampling algorithm itself is not part of the contract.
inline std::vector<double> sample_gamma(const GammaParams& g, std::uint64_t seed,
                                        std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample_gamma: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> dist(g.shape, g.scale);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

}  // namespace deal
