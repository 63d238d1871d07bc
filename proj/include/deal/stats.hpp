#pragma once

// Rank-based comparison of several strategies over several datasets:
// average ranks, the Friedman test (chi-square and Iman-Davenport F forms)
// and Nemenyi critical differences.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "deal/distributions.hpp"

namespace deal {

struct RankMatrix {
  std::vector<std::vector<double>> ranks;  // datasets x strategies, 1 = best
  std::vector<double> mean_ranks;

  std::size_t datasets() const noexcept { return ranks.size(); }
  std::size_t strategies() const noexcept { return mean_ranks.size(); }
};

/// Per-row ranks with tied scores sharing the average of their positions.
inline RankMatrix ranks(const std::vector<std::vector<double>>& scores, bool higher_is_better = true) {
  if (scores.empty()) throw std::invalid_argument("ranks: need at least one dataset");
  const std::size_t k = scores.front().size();
  if (k < 2) throw std::invalid_argument("ranks: need at least two strategies");
  RankMatrix rm;
  rm.mean_ranks.assign(k, 0.0);
  for (const auto& row : scores) {
    if (row.size() != k) throw std::invalid_argument("ranks: ragged score matrix");
    for (double v : row)
      if (std::isnan(v)) throw std::invalid_argument("ranks: NaN score");
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
      return higher_is_better ? row[a] > row[b] : row[a] < row[b];
    });
    std::vector<double> r(k);
    for (std::size_t i = 0; i < k;) {
      std::size_t j = i;
      while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
      const double avg = (static_cast<double>(i + j) / 2.0) + 1.0;
      for (std::size_t m = i; m <= j; ++m) r[order[m]] = avg;
      i = j + 1;
    }
    for (std::size_t c = 0; c < k; ++c) rm.mean_ranks[c] += r[c];
    rm.ranks.push_back(std::move(r));
  }
  for (auto& m : rm.mean_ranks) m /= static_cast<double>(scores.size());
  return rm;
}

/// Upper tail of the chi-square distribution.
inline double chi2_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

/// Upper tail of the F(d1, d2) distribution via the incomplete beta.
inline double f_sf(double f, double d1, double d2) {
  if (f <= 0.0) return 1.0;
  return reg_inc_beta(d2 / (d2 + d1 * f), BetaParams(d2 / 2.0, d1 / 2.0));
}

struct FriedmanResult {
  double chi2 = 0.0;
  double iman_davenport_f = 0.0;
  double p_chi2 = 1.0;
  double p_f = 1.0;
};

/// Friedman statistic from mean ranks over N datasets:
///   chi2 = 12N / (k(k+1)) * (sum R_j^2 - k(k+1)^2 / 4),
///   F = (N-1) chi2 / (N(k-1) - chi2) ~ F(k-1, (k-1)(N-1)).
inline FriedmanResult friedman(const std::vector<double>& mean_ranks, std::size_t n_datasets) {
  const double k = static_cast<double>(mean_ranks.size());
  const double n = static_cast<double>(n_datasets);
  if (mean_ranks.size() < 2 || n_datasets < 2) {
    throw std::invalid_argument("friedman: need k >= 2 strategies and N >= 2 datasets");
  }
  double sum_sq = 0.0;
  for (double r : mean_ranks) sum_sq += r * r;
  FriedmanResult res;
  res.chi2 = std::max(0.0, 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0));
  res.p_chi2 = chi2_sf(res.chi2, k - 1.0);
  const double denom = n * (k - 1.0) - res.chi2;
  if (denom <= 0.0) {
    // Every dataset ranks the strategies identically.
    res.iman_davenport_f = std::numeric_limits<double>::infinity();
    res.p_f = 0.0;
  } else {
    res.iman_davenport_f = (n - 1.0) * res.chi2 / denom;
    res.p_f = f_sf(res.iman_davenport_f, k - 1.0, (k - 1.0) * (n - 1.0));
  }
  return res;
}

inline FriedmanResult friedman(const RankMatrix& r) { return friedman(r.mean_ranks, r.datasets()); }

namespace detail {

// Two-tailed Nemenyi critical values q_alpha for k = 2..10: studentized range
// quantiles with infinite degrees of freedom divided by sqrt(2).
inline constexpr std::array<double, 9> kNemenyiQ01 = {2.576, 2.913, 3.113, 3.255, 3.364,
                                                      3.452, 3.526, 3.590, 3.646};
inline constexpr std::array<double, 9> kNemenyiQ05 = {1.960, 2.343, 2.569, 2.728, 2.850,
                                                      2.949, 3.031, 3.102, 3.164};
inline constexpr std::array<double, 9> kNemenyiQ10 = {1.645, 2.052, 2.291, 2.459, 2.589,
                                                      2.693, 2.780, 2.855, 2.920};

}  // namespace detail

inline double nemenyi_q(std::size_t k, double alpha) {
  if (k < 2 || k > 10) throw std::invalid_argument("nemenyi: k must be in [2, 10]");
  const std::size_t i = k - 2;
  if (std::abs(alpha - 0.01) < 1e-12) return detail::kNemenyiQ01[i];
  if (std::abs(alpha - 0.05) < 1e-12) return detail::kNemenyiQ05[i];
  if (std::abs(alpha - 0.10) < 1e-12) return detail::kNemenyiQ10[i];
  throw std::invalid_argument("nemenyi: alpha must be 0.01, 0.05 or 0.10");
}

/// Critical difference in mean rank: q_alpha * sqrt(k(k+1) / (6N)).
inline double nemenyi_cd(std::size_t k, std::size_t n_datasets, double alpha) {
  if (n_datasets == 0) throw std::invalid_argument("nemenyi: N must be >= 1");
  const double kk = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kk * (kk + 1.0) / (6.0 * static_cast<double>(n_datasets)));
}

inline constexpr std::array<double, 3> kSignificanceLevels = {0.01, 0.05, 0.10};

struct PairwiseComparison {
  std::size_t a;
  std::size_t b;
  double rank_difference;  // mean_rank[a] - mean_rank[b]
  std::array<bool, 3> significant;  // per kSignificanceLevels
};

struct BenchmarkReport {
  std::vector<std::string> datasets;
  std::vector<std::string> strategies;
  std::vector<std::vector<double>> scores;
  RankMatrix rank_matrix;
  std::optional<FriedmanResult> friedman;  // absent with fewer than two datasets
  std::array<double, 3> critical_difference{};
  std::vector<PairwiseComparison> pairs;
  std::vector<std::size_t> best;         // per dataset
  std::vector<std::size_t> second_best;  // per dataset
};

/// Ranks, Friedman test and pairwise Nemenyi flags for a datasets x strategies
/// score table (higher is better).
inline BenchmarkReport compare(std::vector<std::string> datasets, std::vector<std::string> strategies,
                               std::vector<std::vector<double>> scores) {
  if (strategies.size() < 2) throw std::invalid_argument("compare: need at least two strategies");
  if (datasets.size() != scores.size()) throw std::invalid_argument("compare: score rows != datasets");
  BenchmarkReport rep;
  rep.rank_matrix = ranks(scores);
  const std::size_t k = strategies.size();
  const std::size_t n = datasets.size();
  if (n >= 2) rep.friedman = friedman(rep.rank_matrix);
  for (std::size_t i = 0; i < kSignificanceLevels.size(); ++i) {
    rep.critical_difference[i] = nemenyi_cd(k, n, kSignificanceLevels[i]);
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      PairwiseComparison pc{a, b, rep.rank_matrix.mean_ranks[a] - rep.rank_matrix.mean_ranks[b], {}};
      for (std::size_t i = 0; i < kSignificanceLevels.size(); ++i) {
        pc.significant[i] = n >= 2 && std::abs(pc.rank_difference) > rep.critical_difference[i];
      }
      rep.pairs.push_back(pc);
    }
  for (const auto& row : rep.rank_matrix.ranks) {
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t x, std::size_t y) { return row[x] < row[y]; });
    rep.best.push_back(order[0]);
    rep.second_best.push_back(order[1]);
  }
  rep.datasets = std::move(datasets);
  rep.strategies = std::move(strategies);
  rep.scores = std::move(scores);
  return rep;
}

inline const PairwiseComparison* find_pair(const BenchmarkReport& r, std::size_t a, std::size_t b) {
  for (const auto& p : r.pairs)
    if ((p.a == a && p.b == b) || (p.a == b && p.b == a)) return &p;
  return nullptr;
}

}  // namespace deal
