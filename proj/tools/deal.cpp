// deal: preprocessing, benchmarking and plotting for pool-based active learning.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deal/commands.hpp"

namespace {

struct BenchFlags {
  std::optional<std::string> config;
  std::vector<std::string> datasets;  // csv[:meta]
  std::vector<std::string> strategies;
  std::optional<double> delta;
  std::optional<std::size_t> ers_candidates, ers_eval, folds, repeats, max_iters;
};

deal::cli::BenchConfig bench_config(const BenchFlags& f, std::optional<std::uint64_t> seed,
                                    std::optional<std::size_t> jobs, std::optional<std::string> out) {
  deal::cli::BenchConfig c = f.config ? deal::cli::load_bench_config(*f.config) : deal::cli::BenchConfig{};
  if (!f.datasets.empty()) c.datasets.clear();
  for (const auto& d : f.datasets) {
    deal::cli::DatasetEntry e;
    if (auto colon = d.find(':'); colon != std::string::npos) {
      e.csv = d.substr(0, colon);
      e.meta = d.substr(colon + 1);
    } else {
      e.csv = d;
    }
    c.datasets.push_back(e);
  }
  if (!f.strategies.empty()) c.strategies = f.strategies;
  if (f.delta) c.delta = *f.delta;
  if (f.ers_candidates) c.ers_candidates = *f.ers_candidates;
  if (f.ers_eval) c.ers_eval = *f.ers_eval;
  if (f.folds) c.folds = *f.folds;
  if (f.repeats) c.repeats = *f.repeats;
  if (f.max_iters) c.max_iters = *f.max_iters;
  if (seed) c.seed = *seed;
  if (jobs) c.jobs = *jobs;
  if (out) c.out_dir = *out;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pool-based active learning with second-order class posteriors"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--jobs", jobs, "Worker threads (default: hardware concurrency)");
  app.add_option("--out", out, "Output directory");

  deal::cli::PreprocessOptions pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Encode, standardize and project a CSV dataset");
  pre_cmd->add_option("--in", pre.input, "Input CSV")->required();
  pre_cmd->add_option("--meta", pre.meta, "JSON sidecar describing the columns")->required();

  BenchFlags bf;
  auto* bench_cmd = app.add_subcommand("bench", "Cross-validated learning-curve benchmark");
  bench_cmd->add_option("--config", bf.config, "JSON run configuration");
  bench_cmd->add_option("--dataset", bf.datasets, "Dataset CSV, optionally csv:meta.json (repeatable)");
  bench_cmd->add_option("--strategies", bf.strategies, "Subset of DEAL, US, ERS, RS")->delimiter(',');
  bench_cmd->add_option("--delta", bf.delta, "Prior pseudo-count");
  bench_cmd->add_option("--ers-candidates", bf.ers_candidates, "ERS candidate subsample");
  bench_cmd->add_option("--ers-eval", bf.ers_eval, "ERS evaluation subsample");
  bench_cmd->add_option("--folds", bf.folds, "Cross-validation folds");
  bench_cmd->add_option("--repeats", bf.repeats, "Repeats for seeded strategies");
  bench_cmd->add_option("--max-iters", bf.max_iters, "Maximum curve length");

  deal::cli::XorDemoOptions xo;
  auto* xor_cmd = app.add_subcommand("xor-demo", "First queries on the XOR problem with one unlabeled quadrant");
  xor_cmd->add_option("--seeds", xo.seeds, "Number of consecutive generator seeds");
  xor_cmd->add_option("--per-quadrant", xo.per_quadrant, "Pool points per quadrant");
  xor_cmd->add_option("--spread", xo.spread, "Blob standard deviation");
  xor_cmd->add_option("--iterations", xo.iterations, "Acquisitions per run");

  deal::cli::PlotOptions po;
  auto* plot_cmd = app.add_subcommand("plot", "Learning-curve SVGs from curves.csv");
  plot_cmd->add_option("--curves", po.curves, "curves.csv from bench")->required();
  plot_cmd->add_option("--summary", po.summary, "summary.csv for the full-data accuracy line");
  plot_cmd->add_option("--strategies", po.strategies, "Strategies to draw")->delimiter(',');

  deal::cli::ReportOptions ro;
  auto* report_cmd = app.add_subcommand("report", "Rank tables and significance tests from summary.csv");
  report_cmd->add_option("--summary", ro.summary, "summary.csv from bench")->required();

  for (auto* sub : {pre_cmd, bench_cmd, xor_cmd, plot_cmd, report_cmd}) {
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--jobs", jobs, "Worker threads");
    sub->add_option("--out", out, "Output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : deal::cli::kExitInput;
  }

  try {
    if (*pre_cmd) {
      if (out) pre.out_dir = *out;
      return deal::cli::cmd_preprocess(pre);
    }
    if (*bench_cmd) {
      deal::cli::BenchConfig cfg;
      try {
        cfg = bench_config(bf, seed, jobs, out);
      } catch (const deal::input_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return deal::cli::kExitInput;
      }
      return deal::cli::cmd_bench(cfg);
    }
    if (*xor_cmd) {
      if (seed) xo.seed = *seed;
      if (out) xo.out_dir = *out;
      return deal::cli::cmd_xor_demo(xo);
    }
    if (*plot_cmd) {
      if (out) po.out_dir = *out;
      return deal::cli::cmd_plot(po);
    }
    if (*report_cmd) {
      if (out) ro.out_dir = *out;
      return deal::cli::cmd_report(ro);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
