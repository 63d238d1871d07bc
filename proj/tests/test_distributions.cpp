#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "deal/distributions.hpp"

using namespace deal;

namespace {

double beta_pdf(double q, double a, double b) {
  if (q <= 0.0 || q >= 1.0) return 0.0;
  const double lb = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp((a - 1.0) * std::log(q) + (b - 1.0) * std::log1p(-q) - lb);
}

// E[min(Q, 1-Q)] by quadrature, split at 1/2 so the kink sits on an endpoint.
double quad_expected_min(double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double lo = ts.integrate([&](double q) { return q * beta_pdf(q, a, b); }, 0.0, 0.5);
  const double hi = ts.integrate([&](double q) { return (1.0 - q) * beta_pdf(q, a, b); }, 0.5, 1.0);
  return lo + hi;
}

double quad_cdf(double x, double a, double b) {
  if (x == 0.0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double q) { return beta_pdf(q, a, b); }, 0.0, x);
}

double ks_gamma_ratio(double a, double b, std::size_t n, std::uint64_t seed) {
  const auto g1 = sample_gamma(GammaParams(a, 1.7), seed, n);
  const auto g2 = sample_gamma(GammaParams(b, 1.7), seed + 1, n);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = g1[i] / (g1[i] + g2[i]);
  std::ranges::sort(r);
  const BetaParams p(a, b);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = reg_inc_beta(r[i], p);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

}  // namespace

TEST(BetaParams, RejectsNonPositiveOrNonFinite) {
  EXPECT_THROW(BetaParams(0.0, 1.0), std::domain_error);
  EXPECT_THROW(BetaParams(1.0, -2.0), std::domain_error);
  EXPECT_THROW(BetaParams(INFINITY, 1.0), std::domain_error);
  EXPECT_THROW(BetaParams(NAN, 1.0), std::domain_error);
  EXPECT_THROW(GammaParams(1.0, 0.0), std::domain_error);
  EXPECT_NO_THROW(BetaParams(1e-3, 1e3));
}

TEST(RegIncBeta, Examples) {
  for (double a : {0.3, 1.0, 7.5, 120.0}) EXPECT_NEAR(reg_inc_beta(0.5, BetaParams(a, a)), 0.5, 1e-12);
  EXPECT_NEAR(reg_inc_beta(0.3, BetaParams(1, 1)), 0.3, 1e-14);
  EXPECT_NEAR(reg_inc_beta(0.5, BetaParams(1.5, 0.5)), 0.5 - 1.0 / std::numbers::pi, 1e-12);
  EXPECT_NEAR(reg_inc_beta(0.5, BetaParams(1.5, 0.5)), 0.18169, 1e-5);
}

TEST(RegIncBeta, Endpoints) {
  const BetaParams p(2.3, 0.7);
  EXPECT_EQ(reg_inc_beta(0.0, p), 0.0);
  EXPECT_EQ(reg_inc_beta(1.0, p), 1.0);
}

TEST(RegIncBeta, DomainErrors) {
  EXPECT_THROW(reg_inc_beta(-0.01, BetaParams(1, 1)), std::domain_error);
  EXPECT_THROW(reg_inc_beta(1.01, BetaParams(1, 1)), std::domain_error);
  EXPECT_THROW(reg_inc_beta(NAN, BetaParams(1, 1)), std::domain_error);
}

TEST(RegIncBeta, MatchesQuadratureOracle) {
  for (double a : {0.5, 1.3, 4.0, 25.0})
    for (double b : {0.5, 2.0, 9.0, 40.0})
      for (double x : {0.05, 0.3, 0.5, 0.77, 0.95}) {
        EXPECT_NEAR(reg_inc_beta(x, BetaParams(a, b)), quad_cdf(x, a, b), 1e-10) << a << ' ' << b << ' ' << x;
      }
}

TEST(RegIncBeta, AgreesWithBoostOnWideRange) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lx(-1.0, 2.7), ux(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = std::pow(10.0, lx(rng)), b = std::pow(10.0, lx(rng)), x = ux(rng);
    EXPECT_NEAR(reg_inc_beta(x, BetaParams(a, b)), boost::math::ibeta(a, b, x), 1e-12) << a << ' ' << b << ' ' << x;
  }
}

TEST(RegIncBeta, ReflectionAndFirstShapeOneIdentities) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> shape(0.1, 60.0), ux(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = shape(rng), b = shape(rng), x = ux(rng);
    EXPECT_NEAR(reg_inc_beta(x, BetaParams(a, b)) + reg_inc_beta(1.0 - x, BetaParams(b, a)), 1.0, 1e-12);
    EXPECT_NEAR(reg_inc_beta(x, BetaParams(1.0, b)), 1.0 - std::pow(1.0 - x, b), 1e-12);
  }
}

TEST(RegIncBeta, MonotoneInX) {
  const BetaParams p(3.7, 11.2);
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = reg_inc_beta(i / 1000.0, p);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(BetaMean, Examples) {
  EXPECT_DOUBLE_EQ(beta_mean(BetaParams(1, 1)), 0.5);
  EXPECT_DOUBLE_EQ(beta_mean(BetaParams(2, 6)), 0.25);
  EXPECT_DOUBLE_EQ(beta_mean(BetaParams(0.5, 4.5)), 0.1);
}

TEST(ExpectedMin, Examples) {
  EXPECT_NEAR(expected_min(BetaParams(1, 1)), 0.25, 1e-14);
  EXPECT_NEAR(expected_min(BetaParams(0.5, 0.5)), 0.5 - 1.0 / std::numbers::pi, 1e-12);
  EXPECT_NEAR(expected_min(BetaParams(0.5, 0.5)), quad_expected_min(0.5, 0.5), 1e-9);
}

TEST(ExpectedMin, MatchesQuadratureOnLogGrid) {
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double a = 0.5 * std::pow(100.0, i / 19.0);
      const double b = 0.5 * std::pow(100.0, j / 19.0);
      EXPECT_NEAR(expected_min(BetaParams(a, b)), quad_expected_min(a, b), 1e-8) << a << ' ' << b;
    }
}

TEST(ExpectedMin, BoundedByPointRisk) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> le(-2.0, 3.0);
  for (int i = 0; i < 5000; ++i) {
    const BetaParams p(std::pow(10.0, le(rng)), std::pow(10.0, le(rng)));
    const double m = beta_mean(p);
    const double e = expected_min(p);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, std::min(m, 1.0 - m) + 1e-15);
  }
}

TEST(DiscreteSecondOrder, Examples) {
  EXPECT_DOUBLE_EQ(discrete_expected_min(DiscreteSecondOrder({{0.0, 0.5}, {1.0, 0.5}})), 0.0);
  EXPECT_DOUBLE_EQ(discrete_expected_min(DiscreteSecondOrder({{0.5, 1.0}})), 0.5);
  EXPECT_DOUBLE_EQ(discrete_expected_min(DiscreteSecondOrder({{0.2, 0.5}, {0.8, 0.5}})), 0.2);
  EXPECT_DOUBLE_EQ(DiscreteSecondOrder({{0.0, 0.5}, {1.0, 0.5}}).mean(), 0.5);
}

TEST(DiscreteSecondOrder, Validation) {
  EXPECT_THROW(DiscreteSecondOrder({{0.2, 0.5}, {0.8, 0.4}}), std::domain_error);
  EXPECT_THROW(DiscreteSecondOrder({{1.2, 1.0}}), std::domain_error);
  EXPECT_THROW(DiscreteSecondOrder({{0.2, -0.5}, {0.8, 1.5}}), std::domain_error);
  EXPECT_THROW(DiscreteSecondOrder(std::vector<DiscreteSecondOrder::Atom>{}), std::domain_error);
}

TEST(SampleGamma, Moments) {
  const auto a = sample_gamma(GammaParams(1, 1), 1, 1'000'000);
  double mean = 0.0;
  for (double v : a) mean += v;
  mean /= a.size();
  EXPECT_NEAR(mean, 1.0, 0.01);

  const auto b = sample_gamma(GammaParams(3, 2), 2, 1'000'000);
  double m = 0.0, s2 = 0.0;
  for (double v : b) m += v;
  m /= b.size();
  for (double v : b) s2 += (v - m) * (v - m);
  s2 /= b.size() - 1;
  EXPECT_NEAR(s2, 12.0, 0.02 * 12.0);
  for (double v : b) ASSERT_GE(v, 0.0);
}

TEST(SampleGamma, DeterministicAndValidated) {
  EXPECT_EQ(sample_gamma(GammaParams(2, 1), 42, 100), sample_gamma(GammaParams(2, 1), 42, 100));
  EXPECT_NE(sample_gamma(GammaParams(2, 1), 42, 100), sample_gamma(GammaParams(2, 1), 43, 100));
  EXPECT_THROW(sample_gamma(GammaParams(2, 1), 42, 0), std::invalid_argument);
}

TEST(SampleGamma, RatioIsBetaDistributed) {
  EXPECT_LT(ks_gamma_ratio(2.0, 5.0, 1'000'000, 101), 0.005);
}
