// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "benchmark_scores.hpp"
#include "deal/commands.hpp"
#include "deal/deal.hpp"

using namespace deal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double beta_pdf(double q, double a, double b) {
  if (q <= 0.0 || q >= 1.0) return 0.0;
  const double lb = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp((a - 1.0) * std::log(q) + (b - 1.0) * std::log1p(-q) - lb);
}

double quad_expected_min(double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double q) { return q * beta_pdf(q, a, b); }, 0.0, 0.5) +
         ts.integrate([&](double q) { return (1.0 - q) * beta_pdf(q, a, b); }, 0.5, 1.0);
}

Outcome nemenyi_constants() {
  const double cd01 = nemenyi_cd(4, 32, 0.01), cd10 = nemenyi_cd(4, 32, 0.10);
  return {std::abs(cd01 - 1.004) <= 0.002 && std::abs(cd10 - 0.739) <= 0.002,
          "CD(0.01)=" + num(cd01) + " CD(0.10)=" + num(cd10)};
}

Outcome published_ranks() {
  std::vector<std::string> names;
  std::vector<std::vector<double>> scores;
  for (const auto& r : testdata::kUciScores) {
    names.emplace_back(r.dataset);
    scores.emplace_back(r.alc.begin(), r.alc.end());
  }
  const auto rep = compare(names, {"RS", "US", "ERS", "DEAL"}, scores);
  const std::array<double, 4> expected = {3.09, 2.56, 2.97, 1.38};
  bool ok = true;
  std::string d = "mean ranks";
  for (std::size_t j = 0; j < 4; ++j) {
    ok = ok && std::abs(rep.rank_matrix.mean_ranks[j] - expected[j]) <= 0.05;
    d += " " + num(rep.rank_matrix.mean_ranks[j]);
  }
  for (std::size_t a = 0; a < 3; ++a) {
    ok = ok && find_pair(rep, a, 3)->significant[0];
    for (std::size_t b = a + 1; b < 3; ++b) ok = ok && !find_pair(rep, a, b)->significant[2];
  }
  const double p = rep.friedman->p_f;
  ok = ok && p >= 1e-10 && p <= 1e-8;
  return {ok, d + "; Iman-Davenport p=" + num(p, 3)};
}

Outcome closed_form_vs_quadrature() {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double a = 0.5 * std::pow(100.0, i / 19.0), b = 0.5 * std::pow(100.0, j / 19.0);
      worst = std::max(worst, std::abs(expected_min(BetaParams(a, b)) - quad_expected_min(a, b)));
    }
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> shape(0.1, 60.0), ux(0.0, 1.0);
  double worst_id = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double a = shape(rng), b = shape(rng), x = ux(rng);
    worst_id = std::max(worst_id, std::abs(reg_inc_beta(x, BetaParams(a, b)) +
                                           reg_inc_beta(1.0 - x, BetaParams(b, a)) - 1.0));
    worst_id = std::max(worst_id, std::abs(reg_inc_beta(x, BetaParams(1.0, b)) - (1.0 - std::pow(1.0 - x, b))));
  }
  return {worst <= 1e-8 && worst_id <= 1e-12,
          "max quadrature error " + num(worst, 3) + ", max identity error " + num(worst_id, 3)};
}

Outcome gamma_ratio_is_beta() {
  const std::array<std::pair<double, double>, 5> pairs = {{{0.5, 0.5}, {2, 5}, {1, 1}, {7.5, 0.5}, {20, 30}}};
  const std::size_t n = 1'000'000;
  double worst = 0.0;
  std::uint64_t seed = 1;
  for (auto [a, b] : pairs) {
    const auto g1 = sample_gamma(GammaParams(a, 1.3), seed++, n);
    const auto g2 = sample_gamma(GammaParams(b, 1.3), seed++, n);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = g1[i] / (g1[i] + g2[i]);
    std::ranges::sort(r);
    const BetaParams p(a, b);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = reg_inc_beta(r[i], p);
      d = std::max({d, std::abs(f - double(i) / n), std::abs(double(i + 1) / n - f)});
    }
    worst = std::max(worst, d);
  }
  return {worst < 0.005, "max KS distance " + num(worst, 3) + " over 5 pairs"};
}

Outcome jensen() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> le(-2.0, 3.0);
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const BetaParams p(std::pow(10.0, le(rng)), std::pow(10.0, le(rng)));
    violations += point_risk(p) < expected_risk(p);
  }
  const DiscreteSecondOrder d({{0.0, 0.5}, {1.0, 0.5}});
  const double r = std::min(d.mean(), 1.0 - d.mean());
  const double er = discrete_expected_min(d);
  return {violations == 0 && r == 0.5 && er == 0.0,
          std::to_string(violations) + " violations; two-point case (" + num(r) + ", " + num(er) + ")"};
}

Outcome gap_ordering() {
  auto gap = [](double a, double b) { return tuv(BetaParams(a, b), 1.0).gap; };
  const bool even = gap(0.5, 0.5) > gap(5, 5) && gap(5, 5) > gap(50, 50);
  const bool lopsided = gap(20.5, 0.5) < gap(5.5, 0.5) && gap(5.5, 0.5) < gap(1.5, 0.5);
  return {even && lopsided, "gaps " + num(gap(0.5, 0.5)) + " > " + num(gap(5, 5)) + " > " + num(gap(50, 50)) +
                                "; " + num(gap(1.5, 0.5)) + " > " + num(gap(5.5, 0.5)) + " > " + num(gap(20.5, 0.5))};
}

Outcome xor_behavior() {
  cli::XorDemoOptions o;
  o.seed = 0;
  o.seeds = 20;
  const auto r = cli::run_xor_demo(o);
  const bool ok = r.deal_in_empty >= 18 && 20 - r.us_in_empty >= 18 && r.deal_mean_to_target < r.us_mean_to_target;
  return {ok, "first query in empty quadrant: DEAL " + std::to_string(r.deal_in_empty) + "/20, US " +
                  std::to_string(r.us_in_empty) + "/20; mean acquisitions to 0.9: DEAL " +
                  num(r.deal_mean_to_target) + ", US " + num(r.us_mean_to_target)};
}

Outcome ers_equivalence() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  StrategyKind k{Strategy::ers};
  k.candidate_subsample = 1000;
  k.eval_subsample = 1000;
  std::size_t agree = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 8 + t % 23;
    Matrix pool(n, 2);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < 2; ++c) pool(r, c) = g(rng);
    std::vector<Label> y(n);
    for (auto& v : y) v = coin(rng) ? Label::positive : Label::negative;
    y[0] = Label::positive;
    y[1] = Label::negative;
    PoolState s(pool, pool_kernel(pool));
    for (std::size_t i = 0; i < 2 + std::size_t(t % 4); ++i) s.add_label(i, y[i]);

    // every candidate, every hypothetical label, every remaining pool point
    const auto& cfg = s.config();
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t x : s.unlabeled()) {
      const double px = point_estimate(evidence(s.point(x), s.labeled(), cfg), cfg);
      double score = 0.0;
      for (Label lab : {Label::positive, Label::negative}) {
        auto plus = s.labeled();
        const auto xv = s.point(x);
        plus.push_back({std::vector<double>(xv.begin(), xv.end()), lab});
        double risk = 0.0;
        std::size_t m = 0;
        for (std::size_t u : s.unlabeled()) {
          if (u == x) continue;
          const double q = point_estimate(evidence(s.point(u), plus, cfg), cfg);
          risk += std::min(q, 1.0 - q);
          ++m;
        }
        if (m > 0) risk /= double(m);
        score += (lab == Label::positive ? px : 1.0 - px) * risk;
      }
      if (score < best_score - 1e-13) {
        best_score = score;
        best = x;
      }
    }
    agree += ers_select(s, k, std::uint64_t(t)) == best;
  }
  return {agree == 20, std::to_string(agree) + "/20 pools agree"};
}

struct BenchRuns {
  fs::path one, four;
  int rc1 = -1, rc4 = -1;
};

const BenchRuns& bench_runs() {
  static const BenchRuns runs = [] {
    BenchRuns b;
    const fs::path base = fs::temp_directory_path() / "deal_acceptance";
    fs::remove_all(base);
    b.one = base / "jobs1";
    b.four = base / "jobs4";
    auto run = [](const fs::path& out, int jobs) {
      const std::string cmd = std::string("\"") + DEAL_CLI_PATH + "\" bench --config \"" + DEAL_DATA_DIR +
                              "/run.json\" --jobs " + std::to_string(jobs) + " --out \"" + out.string() +
                              "\" > /dev/null";
      const int rc = std::system(cmd.c_str());
      return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    b.rc1 = run(b.one, 1);
    b.rc4 = run(b.four, 4);
    return b;
  }();
  return runs;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome desk_datasets() {
  const auto& b = bench_runs();
  if (b.rc1 != 0) return {false, "bench exited with " + std::to_string(b.rc1)};
  std::ifstream in(b.one / "summary.csv");
  const auto rows = read_summary_csv(in);
  std::map<std::string, std::map<Strategy, double>> alc;
  std::map<std::string, std::size_t> T;
  for (const auto& r : rows) {
    alc[r.dataset][r.strategy] = r.alc_mean;
    T[r.dataset] = r.truncation;
  }
  bool ok = alc.contains("iris") && alc.contains("wine");
  std::string d;
  for (const auto& [ds, m] : alc) {
    const double margin = m.at(Strategy::deal) - m.at(Strategy::rs);
    ok = ok && margin >= 0.05;
    d += (d.empty() ? "" : "; ") + ds + " T=" + std::to_string(T[ds]) + " DEAL " + num(m.at(Strategy::deal), 3) +
         " RS " + num(m.at(Strategy::rs), 3) + " US " + num(m.at(Strategy::us), 3) + " ERS " +
         num(m.at(Strategy::ers), 3) + " margin " + num(margin, 3);
  }
  return {ok, d};
}

Outcome reproducibility() {
  const auto& b = bench_runs();
  if (b.rc1 != 0 || b.rc4 != 0) return {false, "bench exit codes " + std::to_string(b.rc1) + "/" + std::to_string(b.rc4)};
  const bool curves = slurp(b.one / "curves.csv") == slurp(b.four / "curves.csv");
  const bool summary = slurp(b.one / "summary.csv") == slurp(b.four / "summary.csv");
  const bool nonempty = !slurp(b.one / "curves.csv").empty();
  return {curves && summary && nonempty, std::string("curves.csv ") + (curves ? "identical" : "differ") +
                                             ", summary.csv " + (summary ? "identical" : "differ") +
                                             " (jobs 1 vs 4)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Nemenyi critical differences", nemenyi_constants},
      {"published rank table", published_ranks},
      {"closed form vs quadrature", closed_form_vs_quadrature},
      {"gamma ratio is Beta distributed", gamma_ratio_is_beta},
      {"point risk dominates expected risk", jensen},
      {"gap ordering", gap_ordering},
      {"XOR exploration", xor_behavior},
      {"Iris and Wine margin over RS", desk_datasets},
      {"ERS exhaustive equivalence", ers_equivalence},
      {"reproducible across job counts", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << i + 1 << ' ' << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criterion(s) failed\n" : "all criteria passed\n");
  return failures ? 1 : 0;
}
