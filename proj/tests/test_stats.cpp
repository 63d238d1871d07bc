#include <gtest/gtest.h>

#include <random>

#include "benchmark_scores.hpp"
#include "deal/stats.hpp"

using namespace deal;

namespace {

std::vector<std::vector<double>> uci_block() {
  std::vector<std::vector<double>> s;
  for (const auto& r : testdata::kUciScores) s.emplace_back(r.alc.begin(), r.alc.end());
  return s;
}

// Friedman chi-square straight from the per-dataset ranks, with no use of the
// mean-rank shortcut.
double friedman_from_rank_table(const std::vector<std::vector<double>>& r) {
  const double n = r.size(), k = r[0].size();
  double ss = 0;
  for (std::size_t j = 0; j < k; ++j) {
    double col = 0;
    for (const auto& row : r) col += row[j];
    ss += (col - n * (k + 1) / 2) * (col - n * (k + 1) / 2);
  }
  return 12.0 / (n * k * (k + 1)) * ss;
}

}  // namespace

TEST(Ranks, Examples) {
  auto r = ranks({{0.9, 0.8, 0.7, 0.6}});
  EXPECT_EQ(r.ranks[0], (std::vector<double>{1, 2, 3, 4}));
  r = ranks({{0.8, 0.8, 0.6, 0.5}});
  EXPECT_EQ(r.ranks[0], (std::vector<double>{1.5, 1.5, 3, 4}));
  r = ranks({{0.5, 0.5, 0.5}});
  EXPECT_EQ(r.ranks[0], (std::vector<double>{2, 2, 2}));
  r = ranks({{0.1, 0.2}}, false);
  EXPECT_EQ(r.ranks[0], (std::vector<double>{1, 2}));
}

TEST(Ranks, Errors) {
  EXPECT_THROW(ranks({}), std::invalid_argument);
  EXPECT_THROW(ranks({{1.0}}), std::invalid_argument);
  EXPECT_THROW(ranks({{1.0, 2.0}, {1.0}}), std::invalid_argument);
  EXPECT_THROW(ranks({{1.0, std::nan("")}}), std::invalid_argument);
}

TEST(Ranks, RowSumsAndMonotoneInvariance) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> level(0, 4);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> row(6);
    for (auto& v : row) v = 0.1 * level(rng);
    const auto a = ranks({row});
    EXPECT_DOUBLE_EQ(std::accumulate(a.ranks[0].begin(), a.ranks[0].end(), 0.0), 21.0);
    auto tr = row;
    for (auto& v : tr) v = std::exp(3 * v) - 7;
    EXPECT_EQ(ranks({tr}).ranks[0], a.ranks[0]);
  }
}

TEST(Ranks, UciBlock) {
  const auto r = ranks(uci_block());
  const std::vector<double> expected = {3.09, 2.56, 2.97, 1.38};
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(r.mean_ranks[j], expected[j], 0.05);
}

TEST(Ranks, DigitBlock) {
  std::vector<std::vector<double>> s;
  for (const auto& r : testdata::kDigitScores) s.emplace_back(r.begin(), r.end());
  const auto rep = compare(std::vector<std::string>(10, "g"), {"RS", "US", "ERS", "DEAL"}, s);
  const std::vector<double> expected = {4.0, 3.0, 1.9, 1.1};
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(rep.rank_matrix.mean_ranks[j], expected[j], 1e-12);
}

TEST(Distributions, TailOracles) {
  // chi2 with 2 dof is exponential; F(2, d) has a closed-form tail.
  for (double x : {0.1, 1.0, 5.0, 30.0}) {
    EXPECT_NEAR(chi2_sf(x, 2), std::exp(-x / 2), 1e-14);
    for (double d : {3.0, 10.0, 93.0})
      EXPECT_NEAR(f_sf(x, 2, d) / std::pow(1 + 2 * x / d, -d / 2), 1.0, 1e-11);
  }
  EXPECT_EQ(chi2_sf(0, 3), 1.0);
  EXPECT_EQ(f_sf(0, 3, 9), 1.0);
  EXPECT_NEAR(chi2_sf(7.3, 3), 0.06292623645904312, 1e-12);
  EXPECT_NEAR(f_sf(2.7, 3, 20), 0.07310245767409326, 1e-10);
}

TEST(Friedman, IdenticalRanksGiveNoEvidence) {
  const auto f = friedman({2.5, 2.5, 2.5, 2.5}, 10);
  EXPECT_NEAR(f.chi2, 0, 1e-12);
  EXPECT_NEAR(f.p_chi2, 1, 1e-12);
  EXPECT_NEAR(f.p_f, 1, 1e-12);
}

TEST(Friedman, MeanRankFormulaMatchesRankTable) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 30; ++t) {
    std::vector<std::vector<double>> s(7, std::vector<double>(5));
    for (auto& row : s)
      for (auto& v : row) v = std::round(u(rng) * 10) / 10;
    const auto r = ranks(s);
    EXPECT_NEAR(friedman(r).chi2, friedman_from_rank_table(r.ranks), 1e-10);
    // column permutation leaves the statistic unchanged
    auto perm = s;
    for (auto& row : perm) std::ranges::rotate(row, row.begin() + 2);
    EXPECT_NEAR(friedman(ranks(perm)).chi2, friedman(r).chi2, 1e-10);
  }
}

TEST(Friedman, PublishedMeanRanks) {
  const auto f = friedman({3.09, 2.56, 2.97, 1.38}, 32);
  EXPECT_NEAR(f.chi2, 35.0784, 1e-9);
  EXPECT_NEAR(f.iman_davenport_f, 31 * 35.0784 / (96 - 35.0784), 1e-9);
  EXPECT_GT(f.p_f, 2.53e-10);
  EXPECT_LT(f.p_f, 2.53e-8);
  EXPECT_GT(f.p_chi2, f.p_f);
}

TEST(Friedman, DegenerateAgreement) {
  const auto f = friedman({1, 2, 3}, 5);
  EXPECT_NEAR(f.chi2, 10.0, 1e-12);
  EXPECT_EQ(f.p_f, 0.0);
  EXPECT_TRUE(std::isinf(f.iman_davenport_f));
  EXPECT_THROW(friedman({1.0}, 5), std::invalid_argument);
  EXPECT_THROW(friedman({1.0, 2.0}, 1), std::invalid_argument);
}

TEST(Nemenyi, CriticalDifferences) {
  EXPECT_NEAR(nemenyi_cd(4, 32, 0.01), 1.004, 0.002);
  EXPECT_NEAR(nemenyi_cd(4, 32, 0.10), 0.739, 0.002);
  EXPECT_NEAR(nemenyi_cd(4, 128, 0.05), nemenyi_cd(4, 32, 0.05) / 2, 1e-12);
  for (double a : kSignificanceLevels) {
    for (std::size_t k = 2; k < 10; ++k) EXPECT_LT(nemenyi_cd(k, 12, a), nemenyi_cd(k + 1, 12, a));
    for (std::size_t n = 2; n < 40; ++n) EXPECT_GT(nemenyi_cd(5, n, a), nemenyi_cd(5, n + 1, a));
  }
  // k = 2 reduces to the two-sided normal quantile
  EXPECT_NEAR(nemenyi_q(2, 0.05), 1.960, 1e-3);
  EXPECT_NEAR(nemenyi_q(2, 0.01), 2.576, 1e-3);
  EXPECT_THROW(nemenyi_cd(11, 5, 0.05), std::invalid_argument);
  EXPECT_THROW(nemenyi_cd(1, 5, 0.05), std::invalid_argument);
  EXPECT_THROW(nemenyi_cd(4, 5, 0.02), std::invalid_argument);
  EXPECT_THROW(nemenyi_cd(4, 0, 0.05), std::invalid_argument);
}

TEST(Compare, UciBlockFlags) {
  std::vector<std::string> names;
  for (const auto& r : testdata::kUciScores) names.emplace_back(r.dataset);
  const auto rep = compare(names, {"RS", "US", "ERS", "DEAL"}, uci_block());
  ASSERT_TRUE(rep.friedman);
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_TRUE(find_pair(rep, a, 3)->significant[0]) << a;
    for (std::size_t b = a + 1; b < 3; ++b) EXPECT_FALSE(find_pair(rep, a, b)->significant[2]);
  }
  EXPECT_EQ(rep.best[0], 3u);   // Anneal
  EXPECT_EQ(rep.second_best[0], 1u);
  EXPECT_EQ(rep.pairs.size(), 6u);
}

TEST(Compare, IdenticalScoresFlagNothing) {
  const auto rep = compare({"a", "b"}, {"x", "y"}, {{0.7, 0.7}, {0.6, 0.6}});
  for (const auto& p : rep.pairs)
    for (bool s : p.significant) EXPECT_FALSE(s);
  EXPECT_THROW(compare({"a"}, {"x"}, {{0.7}}), std::invalid_argument);
  EXPECT_THROW(compare({"a", "b"}, {"x", "y"}, {{0.7, 0.1}}), std::invalid_argument);
}

TEST(Compare, SingleDatasetOmitsTests) {
  const auto rep = compare({"a"}, {"x", "y", "z"}, {{0.7, 0.8, 0.6}});
  EXPECT_FALSE(rep.friedman);
  for (const auto& p : rep.pairs) EXPECT_FALSE(p.significant[2]);
  EXPECT_EQ(rep.best[0], 1u);
  EXPECT_EQ(rep.second_best[0], 0u);
}
