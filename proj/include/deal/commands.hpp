#pragma once

// Implementations of the command-line subcommands. Each returns a process exit
// code: 0 success, 2 malformed input, 3 failed benchmark cells.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "deal/error.hpp"
#include "deal/harness.hpp"
#include "deal/preprocess.hpp"
#include "deal/report.hpp"
#include "deal/stats.hpp"
#include "deal/strategies.hpp"

namespace deal::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitCellFailure = 3;

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessOptions {
  std::string input;
  std::string meta;
  std::string out_dir = ".";
};

inline int cmd_preprocess(const PreprocessOptions& opt, std::ostream& log = std::cout) {
  try {
    const DatasetMeta meta = load_meta(opt.meta);
    const RawTable table = load_raw_table(opt.input, meta);
    const Dataset ds = preprocess(table, meta);
    fs::create_directories(opt.out_dir);
    std::ostringstream csv;
    write_dataset_csv(csv, ds);
    write_file(fs::path(opt.out_dir) / (ds.name + ".dataset.csv"), csv.str());
    write_file(fs::path(opt.out_dir) / (ds.name + ".provenance.json"), ds.provenance.dump(2) + "\n");
    for (const auto& w : ds.provenance["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
    log << ds.name << ": " << ds.x.rows() << " rows, PCA dimension " << ds.x.cols() << '\n';
    return kExitOk;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

// ---------------------------------------------------------------------------
// bench

struct DatasetEntry {
  std::string csv;
  std::optional<std::string> meta;  // absent: a dataset CSV written by `preprocess`
};

struct BenchConfig {
  std::vector<DatasetEntry> datasets;
  std::vector<std::string> strategies = {"rs", "us", "ers", "deal"};
  double delta = 0.5;
  std::size_t ers_candidates = 250;
  std::size_t ers_eval = 250;
  std::size_t folds = 10;
  std::size_t repeats = 5;
  std::size_t max_iters = kMaxCurveLength;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;  // 0: available parallelism
  std::string out_dir = "bench_out";
};

/// Reads a JSON run configuration. Relative dataset paths resolve against the
/// config file's directory.
inline BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("config " + path + ": " + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).lexically_normal().string();
  };
  BenchConfig c;
  try {
    for (const auto& d : j.at("datasets")) {
      DatasetEntry e;
      if (d.is_string()) {
        e.csv = resolve(d.get<std::string>());
      } else {
        e.csv = resolve(d.at("csv").get<std::string>());
        if (d.contains("meta")) e.meta = resolve(d.at("meta").get<std::string>());
      }
      c.datasets.push_back(e);
    }
    c.strategies = j.value("strategies", c.strategies);
    c.delta = j.value("delta", c.delta);
    c.ers_candidates = j.value("ers_candidates", c.ers_candidates);
    c.ers_eval = j.value("ers_eval", c.ers_eval);
    c.folds = j.value("folds", c.folds);
    c.repeats = j.value("repeats", c.repeats);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.seed = j.value("seed", c.seed);
    c.jobs = j.value("jobs", c.jobs);
    if (j.contains("out")) c.out_dir = resolve(j.at("out").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw input_error("config " + path + ": " + e.what());
  }
  return c;
}

inline void validate(const BenchConfig& c) {
  if (c.datasets.empty()) throw input_error("no datasets configured");
  if (c.strategies.empty()) throw input_error("no strategies configured");
  if (!(c.delta > 0.0)) throw input_error("delta must be positive");
  if (c.folds < 2) throw input_error("folds must be >= 2");
  if (c.repeats < 1) throw input_error("repeats must be >= 1");
  if (c.max_iters < 1) throw input_error("max_iters must be >= 1");
  if (c.ers_candidates < 1 || c.ers_eval < 1) throw input_error("ERS subsample sizes must be >= 1");
  for (const auto& d : c.datasets) {
    if (!fs::exists(d.csv)) throw input_error("dataset not found: " + d.csv);
    if (d.meta && !fs::exists(*d.meta)) throw input_error("sidecar not found: " + *d.meta);
  }
}

inline std::vector<StrategyKind> strategy_kinds(const BenchConfig& c) {
  std::vector<StrategyKind> out;
  for (const auto& name : c.strategies) {
    StrategyKind k;
    k.kind = parse_strategy(name);
    k.candidate_subsample = c.ers_candidates;
    k.eval_subsample = c.ers_eval;
    for (const auto& prev : out)
      if (prev.kind == k.kind) throw input_error("strategy listed twice: " + name);
    out.push_back(k);
  }
  return out;
}

inline std::size_t effective_jobs(std::size_t jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline ReportNotes report_notes(const std::vector<StrategyKind>& kinds) {
  ReportNotes notes;
  for (const auto& k : kinds)
    if (k.kind == Strategy::ers) {
      notes.ers_candidates = k.candidate_subsample;
      notes.ers_eval = k.eval_subsample;
    }
  return notes;
}

inline void write_reports(const fs::path& dir, std::span<const AlcSummary> summary, const ReportNotes& notes) {
  const AlcTable table = alc_table(summary);
  const auto rep = compare_table(table);
  std::ostringstream txt;
  write_report_txt(txt, table, rep, notes);
  write_file(dir / "report.txt", txt.str());
  write_file(dir / "report.json", report_json(table, rep, notes).dump(2) + "\n");
}

inline int cmd_bench(BenchConfig cfg, std::ostream& log = std::cout) {
  std::vector<StrategyKind> kinds;
  std::vector<PreparedDataset> prepared;
  try {
    validate(cfg);
    kinds = strategy_kinds(cfg);
    for (const auto& d : cfg.datasets) {
      DatasetMeta meta;
      if (d.meta) {
        meta = load_meta(*d.meta);
      } else {
        auto base = fs::path(d.csv).filename().string();
        meta = dataset_csv_meta(base.substr(0, base.find('.')));
      }
      const RawTable table = load_raw_table(d.csv, meta);
      for (const auto& p : prepared)
        if (p.name == table.name) throw input_error("duplicate dataset name: " + table.name);
      prepared.push_back(prepare_dataset(table, meta, cfg.folds, cfg.seed));
    }
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  fs::remove(out / "FAILED");
  ExperimentSettings settings;
  settings.strategies = kinds;
  settings.repeats = cfg.repeats;
  settings.max_iters = cfg.max_iters;
  settings.master_seed = cfg.seed;
  settings.delta = cfg.delta;
  const ExperimentResult res = run_experiment(prepared, settings, effective_jobs(cfg.jobs));

  std::ostringstream curves, summary;
  write_curves_csv(curves, res.curves);
  write_summary_csv(summary, res.summary);
  write_file(out / "curves.csv", curves.str());
  write_file(out / "summary.csv", summary.str());
  fs::create_directories(out / "provenance");
  for (const auto& p : prepared) write_file(out / "provenance" / (p.name + ".json"), p.provenance.dump(2) + "\n");
  write_reports(out, res.summary, report_notes(kinds));

  for (const auto& r : res.summary) {
    log << r.dataset << ' ' << strategy_name(r.strategy) << ": ALC " << fmt(r.alc_mean) << " (T=" << r.truncation
        << ", full " << fmt(r.full_accuracy) << ")\n";
  }
  if (!res.failures.empty()) {
    std::ostringstream marker;
    for (const auto& f : res.failures) {
      marker << f.dataset << ' ' << strategy_name(f.strategy) << " fold " << f.fold << " repeat " << f.repeat
             << ": " << f.message << '\n';
    }
    write_file(out / "FAILED", marker.str());
    std::cerr << "error: " << res.failures.size() << " cell(s) failed; see " << (out / "FAILED").string() << '\n';
    return kExitCellFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  std::string summary;
  std::string out_dir = ".";
};

inline int cmd_report(const ReportOptions& opt) {
  try {
    std::ifstream in(opt.summary, std::ios::binary);
    if (!in) throw input_error("cannot open " + opt.summary);
    const auto rows = read_summary_csv(in);
    if (rows.empty()) throw input_error("summary has no rows");
    fs::create_directories(opt.out_dir);
    write_reports(opt.out_dir, rows, {});
    return kExitOk;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

// ---------------------------------------------------------------------------
// plot

struct PlotOptions {
  std::string curves;
  std::optional<std::string> summary;
  std::vector<std::string> strategies;  // empty: all
  std::string out_dir = ".";
};

inline int cmd_plot(const PlotOptions& opt, std::ostream& log = std::cout) {
  try {
    std::ifstream in(opt.curves, std::ios::binary);
    if (!in) throw input_error("cannot open " + opt.curves);
    const auto curves = read_curves_csv(in);
    std::map<std::string, double> full;
    if (opt.summary) {
      std::ifstream sin(*opt.summary, std::ios::binary);
      if (!sin) throw input_error("cannot open " + *opt.summary);
      for (const auto& r : read_summary_csv(sin)) full[r.dataset] = r.full_accuracy;
    }
    std::vector<Strategy> wanted;
    for (const auto& s : opt.strategies) wanted.push_back(parse_strategy(s));
    std::vector<std::string> datasets;
    for (const auto& c : curves)
      if (std::ranges::find(datasets, c.dataset) == datasets.end()) datasets.push_back(c.dataset);
    fs::create_directories(opt.out_dir);
    std::size_t written = 0;
    for (const auto& ds : datasets) {
      std::vector<Strategy> order;
      std::map<Strategy, std::vector<std::vector<double>>> runs;
      for (const auto& c : curves) {
        if (c.dataset != ds) continue;
        if (!wanted.empty() && std::ranges::find(wanted, c.strategy) == wanted.end()) continue;
        if (!runs.contains(c.strategy)) order.push_back(c.strategy);
        runs[c.strategy].push_back(c.accuracies);
      }
      if (order.empty()) continue;
      std::vector<CurveSeries> series;
      for (auto s : order) series.push_back(summarize_runs(std::string(strategy_name(s)), runs[s]));
      std::optional<double> ref;
      if (auto it = full.find(ds); it != full.end()) ref = it->second;
      write_file(fs::path(opt.out_dir) / (ds + ".svg"), learning_curve_svg(ds, series, ref));
      ++written;
    }
    if (written == 0) throw input_error("no curves match the requested strategies");
    log << "wrote " << written << " plot(s) to " << opt.out_dir << '\n';
    return kExitOk;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

// ---------------------------------------------------------------------------
// xor-demo

struct XorDemoOptions {
  std::uint64_t seed = 0;
  std::size_t seeds = 1;  // consecutive generator seeds starting at `seed`
  std::size_t per_quadrant = 50;
  double spread = 0.35;
  std::size_t iterations = 100;
  double target_accuracy = 0.9;
  std::string out_dir = ".";
};

struct XorDemoResult {
  std::size_t deal_in_empty = 0;
  std::size_t us_in_empty = 0;
  double deal_mean_to_target = 0.0;  // unreached counts as iterations + 1
  double us_mean_to_target = 0.0;
  nlohmann::json details;
};

inline XorDemoResult run_xor_demo(const XorDemoOptions& opt) {
  XorDemoResult res;
  StrategyKind deal_kind{Strategy::deal};
  StrategyKind us_kind{Strategy::us};
  std::vector<std::vector<double>> deal_runs, us_runs;
  nlohmann::json per_seed = nlohmann::json::array();
  double deal_sum = 0.0, us_sum = 0.0;
  for (std::size_t i = 0; i < opt.seeds; ++i) {
    const std::uint64_t seed = opt.seed + i;
    const XorScenario s = xor_dataset(opt.per_quadrant, opt.spread, seed);
    const XorRun d = run_xor(s, deal_kind, opt.iterations);
    const XorRun u = run_xor(s, us_kind, opt.iterations);
    const auto dt = acquisitions_to_reach(d.accuracies, opt.target_accuracy);
    const auto ut = acquisitions_to_reach(u.accuracies, opt.target_accuracy);
    res.deal_in_empty += d.first_query_quadrant == s.empty_quadrant;
    res.us_in_empty += u.first_query_quadrant == s.empty_quadrant;
    deal_sum += static_cast<double>(dt.value_or(opt.iterations + 1));
    us_sum += static_cast<double>(ut.value_or(opt.iterations + 1));
    auto query_json = [&](const XorRun& r, const std::optional<std::size_t>& t) {
      const auto p = s.pool.row(r.first_query);
      return nlohmann::json{{"index", r.first_query},
                            {"x", p[0]},
                            {"y", p[1]},
                            {"quadrant", r.first_query_quadrant},
                            {"in_empty_quadrant", r.first_query_quadrant == s.empty_quadrant},
                            {"acquisitions_to_target", t ? nlohmann::json(*t) : nlohmann::json(nullptr)}};
    };
    per_seed.push_back({{"seed", seed},
                        {"empty_quadrant", s.empty_quadrant},
                        {"DEAL", query_json(d, dt)},
                        {"US", query_json(u, ut)}});
    deal_runs.push_back(d.accuracies);
    us_runs.push_back(u.accuracies);
  }
  res.deal_mean_to_target = deal_sum / static_cast<double>(opt.seeds);
  res.us_mean_to_target = us_sum / static_cast<double>(opt.seeds);
  res.details = {{"per_quadrant", opt.per_quadrant},
                 {"spread", opt.spread},
                 {"iterations", opt.iterations},
                 {"target_accuracy", opt.target_accuracy},
                 {"runs", per_seed},
                 {"summary",
                  {{"seeds", opt.seeds},
                   {"DEAL_first_query_in_empty_quadrant", res.deal_in_empty},
                   {"US_first_query_in_empty_quadrant", res.us_in_empty},
                   {"DEAL_mean_acquisitions_to_target", res.deal_mean_to_target},
                   {"US_mean_acquisitions_to_target", res.us_mean_to_target}}}};
  std::vector<CurveSeries> series = {summarize_runs("DEAL", deal_runs), summarize_runs("US", us_runs)};
  res.details["svg"] = learning_curve_svg("XOR: learning curves after the 10-label start", series);
  return res;
}

inline int cmd_xor_demo(const XorDemoOptions& opt, std::ostream& log = std::cout) {
  if (opt.seeds == 0 || opt.iterations == 0 || opt.per_quadrant < 10) {
    std::cerr << "error: seeds and iterations must be >= 1, per-quadrant >= 10\n";
    return kExitInput;
  }
  XorDemoResult res = run_xor_demo(opt);
  fs::create_directories(opt.out_dir);
  write_file(fs::path(opt.out_dir) / "xor_curves.svg", res.details["svg"].get<std::string>());
  res.details.erase("svg");
  write_file(fs::path(opt.out_dir) / "xor_first_queries.json", res.details.dump(2) + "\n");
  log << "first query in the unlabeled quadrant: DEAL " << res.deal_in_empty << "/" << opt.seeds << ", US "
      << res.us_in_empty << "/" << opt.seeds << '\n';
  log << "mean acquisitions to " << fmt(opt.target_accuracy, 2) << " accuracy: DEAL " << fmt(res.deal_mean_to_target, 1)
      << ", US " << fmt(res.us_mean_to_target, 1) << '\n';
  return kExitOk;
}

}  // namespace deal::cli
