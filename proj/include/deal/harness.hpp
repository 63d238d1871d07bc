#pragma once

// Evaluation protocol: stratified CV folds, simulated active-learning loops
// producing learning curves, full-data reference accuracy, curve truncation,
// area under the learning curve, and an XOR toy scenario.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "deal/kde.hpp"
#include "deal/matrix.hpp"
#include "deal/preprocess.hpp"
#include "deal/rng.hpp"
#include "deal/strategies.hpp"

namespace deal {

// Iteration cap shared by the truncation rule.
inline constexpr std::size_t kMaxCurveLength = 200;
// Fraction of the full-data accuracy the worst strategy must reach.
inline constexpr double kTruncationFraction = 0.9;

/// Fold index for every point. Classes are shuffled separately and dealt
/// round-robin with a running counter, so folds are near-equal in size and in
/// class balance. If a class is smaller than `folds` the split falls back to
/// an unstratified shuffle and a warning is appended.
inline std::vector<std::size_t> cv_split(std::span<const Label> labels, std::size_t folds,
                                         std::uint64_t seed,
                                         std::vector<std::string>* warnings = nullptr) {
  const std::size_t n = labels.size();
  if (folds < 2) throw std::invalid_argument("cv_split: need at least 2 folds");
  if (n < folds) throw std::invalid_argument("cv_split: fewer points than folds");
  Rng rng(seed);
  std::vector<std::size_t> neg, pos;
  for (std::size_t i = 0; i < n; ++i) (labels[i] == Label::positive ? pos : neg).push_back(i);
  std::vector<std::size_t> assignment(n);
  std::size_t counter = 0;
  auto deal_out = [&](const std::vector<std::size_t>& members) {
    auto shuffled = sample_without_replacement<std::size_t>(members, members.size(), rng);
    for (std::size_t i : shuffled) assignment[i] = counter++ % folds;
  };
  if (neg.size() < folds || pos.size() < folds) {
    if (warnings) warnings->push_back("a class has fewer members than folds; unstratified split");
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    deal_out(all);
  } else {
    deal_out(neg);
    deal_out(pos);
  }
  return assignment;
}

struct FoldData {
  Matrix train;
  std::vector<Label> train_y;
  Matrix test;
  std::vector<Label> test_y;
};

/// Folds of an already-preprocessed dataset (no refitting).
inline std::vector<FoldData> make_folds(const Dataset& ds, std::span<const std::size_t> assignment,
                                        std::size_t folds) {
  std::vector<FoldData> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr, te;
    for (std::size_t i = 0; i < assignment.size(); ++i) (assignment[i] == f ? te : tr).push_back(i);
    out[f].train = ds.x.select_rows(tr);
    out[f].test = ds.x.select_rows(te);
    for (auto i : tr) out[f].train_y.push_back(ds.y[i]);
    for (auto i : te) out[f].test_y.push_back(ds.y[i]);
  }
  return out;
}

/// Folds of a raw table, refitting the preprocessing pipeline on each
/// training fold and applying it to the matching test fold.
inline std::vector<FoldData> make_folds(const RawTable& t, std::span<const Label> labels,
                                        const PipelineOptions& opts,
                                        std::span<const std::size_t> assignment, std::size_t folds,
                                        std::vector<FittedPipeline>* fitted = nullptr) {
  std::vector<FoldData> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr, te;
    for (std::size_t i = 0; i < assignment.size(); ++i) (assignment[i] == f ? te : tr).push_back(i);
    FittedPipeline fp = fit_pipeline(t, tr, opts);
    out[f].train = fp.transform(t, tr);
    out[f].test = fp.transform(t, te);
    for (auto i : tr) out[f].train_y.push_back(labels[i]);
    for (auto i : te) out[f].test_y.push_back(labels[i]);
    if (fitted) fitted->push_back(std::move(fp));
  }
  return out;
}

/// Test-fold accuracy tracker with incrementally updated class evidence.
class TestEvaluator {
 public:
  TestEvaluator(const Matrix& test, std::span<const Label> labels, const KernelConfig& cfg)
      : test_(test), labels_(labels.begin(), labels.end()), cfg_(cfg), evidence_(test.rows()) {}

  void add(FeatureVector x, Label y) {
    for (std::size_t i = 0; i < test_.rows(); ++i) evidence_[i][y] += evidence_weight(test_.row(i), x, cfg_);
  }

  double accuracy() const {
    if (labels_.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels_.size(); ++i) hits += predict(evidence_[i], cfg_) == labels_[i];
    return static_cast<double>(hits) / static_cast<double>(labels_.size());
  }

 private:
  const Matrix& test_;
  std::vector<Label> labels_;
  KernelConfig cfg_;
  std::vector<ClassEvidence> evidence_;
};

/// Continues an active-learning loop until `length` points are labeled or the
/// pool is exhausted, appending one accuracy per acquisition.
inline void continue_learning_curve(PoolState& state, const LabelOracle& oracle,
                                    TestEvaluator& eval, const StrategyKind& kind, Rng& rng,
                                    std::size_t length, std::vector<double>& accuracies) {
  while (accuracies.size() < length && !state.unlabeled().empty()) {
    const std::size_t q = select(state, kind, rng);
    const Label y = oracle.reveal(q);
    state.add_label(q, y);
    eval.add(state.point(q), y);
    accuracies.push_back(eval.accuracy());
  }
}

/// Accuracy after every acquisition on one fold, from an empty labeled set.
/// Bandwidth and pool density are fixed from the whole training fold.
inline std::vector<double> run_learning_curve(const FoldData& fold, const StrategyKind& kind,
                                              std::size_t max_iters, std::uint64_t seed,
                                              double delta = 0.5) {
  PoolState state(fold.train, pool_kernel(fold.train, delta));
  LabelOracle oracle(fold.train_y);
  TestEvaluator eval(fold.test, fold.test_y, state.config());
  Rng rng(seed);
  const std::size_t length = std::min(max_iters, state.size());
  std::vector<double> acc;
  initialize(state, oracle, kind, rng, [&](std::size_t q) {
    eval.add(state.point(q), state.labeled().back().y);
    acc.push_back(eval.accuracy());
  });
  if (acc.size() > length) acc.resize(length);
  continue_learning_curve(state, oracle, eval, kind, rng, length, acc);
  return acc;
}

/// Test accuracy of the classifier trained on the fully labeled training fold.
inline double fold_accuracy(const FoldData& fold, double delta = 0.5) {
  const KernelConfig cfg = pool_kernel(fold.train, delta);
  TestEvaluator eval(fold.test, fold.test_y, cfg);
  for (std::size_t i = 0; i < fold.train.rows(); ++i) eval.add(fold.train.row(i), fold.train_y[i]);
  return eval.accuracy();
}

/// Mean over folds of the fully labeled accuracy.
inline double full_data_accuracy(std::span<const FoldData> folds, double delta = 0.5) {
  if (folds.empty()) throw std::invalid_argument("full_data_accuracy: no folds");
  double sum = 0.0;
  for (const auto& f : folds) sum += fold_accuracy(f, delta);
  return sum / static_cast<double>(folds.size());
}

/// First labeled-set size t at which the worst mean curve reaches
/// kTruncationFraction * full_acc, capped at 200 and the shortest curve.
inline std::size_t truncation_point(std::span<const std::vector<double>> mean_curves,
                                    double full_acc) {
  if (mean_curves.empty()) throw std::invalid_argument("truncation_point: no curves");
  std::size_t cap = kMaxCurveLength;
  for (const auto& c : mean_curves) cap = std::min(cap, c.size());
  if (cap == 0) throw std::invalid_argument("truncation_point: empty curve");
  const double threshold = kTruncationFraction * full_acc;
  for (std::size_t t = 0; t < cap; ++t) {
    double worst = 1.0;
    for (const auto& c : mean_curves) worst = std::min(worst, c[t]);
    if (worst >= threshold) return t + 1;
  }
  return cap;
}

/// Mean accuracy over labeled-set sizes 1..T.
inline double alc(std::span<const double> curve, std::size_t T) {
  if (T == 0) throw std::invalid_argument("alc: T must be >= 1");
  if (T > curve.size()) throw std::invalid_argument("alc: T exceeds curve length");
  return std::accumulate(curve.begin(), curve.begin() + static_cast<std::ptrdiff_t>(T), 0.0) /
         static_cast<double>(T);
}

inline std::vector<double> mean_curve(std::span<const std::vector<double>> curves) {
  if (curves.empty()) return {};
  std::size_t len = curves.front().size();
  for (const auto& c : curves) len = std::min(len, c.size());
  std::vector<double> m(len, 0.0);
  for (const auto& c : curves)
    for (std::size_t t = 0; t < len; ++t) m[t] += c[t];
  for (auto& v : m) v /= static_cast<double>(curves.size());
  return m;
}

// ---------------------------------------------------------------------------
// XOR scenario

/// Quadrant of a 2-D point: 0 = (+,+), 1 = (-,-), 2 = (+,-), 3 = (-,+).
/// Quadrants 0 and 1 carry class +1.
inline int quadrant_of(FeatureVector x) {
  const bool right = x[0] >= 0.0, up = x[1] >= 0.0;
  if (right && up) return 0;
  if (!right && !up) return 1;
  return right ? 2 : 3;
}

struct XorScenario {
  Matrix pool;
  std::vector<Label> pool_y;
  std::vector<int> pool_blob;
  Matrix test;
  std::vector<Label> test_y;
  int empty_quadrant = 0;
  std::vector<std::size_t> initial_labeled;  // pool indices
};

inline constexpr std::size_t kXorInitialLabels = 10;

/// Four Gaussian blobs at (+-1, +-1) with common spread; diagonal blobs share a
/// class. The initial labeled configuration has 10 pool points drawn from
/// three blobs (each of the three represented), leaving one quadrant unlabeled.
inline XorScenario xor_dataset(std::size_t per_quadrant, double spread, std::uint64_t seed,
                               std::size_t test_per_quadrant = 100) {
  if (per_quadrant < 10) throw std::invalid_argument("xor_dataset: per_quadrant must be >= 10");
  if (!(spread > 0.0)) throw std::invalid_argument("xor_dataset: spread must be positive");
  static constexpr double cx[4] = {1.0, -1.0, 1.0, -1.0};
  static constexpr double cy[4] = {1.0, -1.0, -1.0, 1.0};
  XorScenario s;
  Rng rng(mix_seed(seed, fnv1a("xor")));
  std::normal_distribution<double> noise(0.0, spread);
  auto draw = [&](std::size_t per, Matrix& m, std::vector<Label>& y, std::vector<int>* blob) {
    m = Matrix(4 * per, 2);
    for (int q = 0; q < 4; ++q)
      for (std::size_t i = 0; i < per; ++i) {
        const std::size_t r = static_cast<std::size_t>(q) * per + i;
        m(r, 0) = cx[q] + noise(rng);
        m(r, 1) = cy[q] + noise(rng);
        y.push_back(q < 2 ? Label::positive : Label::negative);
        if (blob) blob->push_back(q);
      }
  };
  draw(per_quadrant, s.pool, s.pool_y, &s.pool_blob);
  draw(test_per_quadrant, s.test, s.test_y, nullptr);
  s.empty_quadrant = static_cast<int>(uniform_index(rng, 4));
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < s.pool.rows(); ++i)
    if (s.pool_blob[i] != s.empty_quadrant) eligible.push_back(i);
  for (;;) {
    s.initial_labeled = sample_without_replacement<std::size_t>(eligible, kXorInitialLabels, rng);
    bool seen[4] = {false, false, false, false};
    for (auto i : s.initial_labeled) seen[s.pool_blob[i]] = true;
    int covered = 0;
    for (bool b : seen) covered += b;
    if (covered == 3) break;
  }
  std::ranges::sort(s.initial_labeled);
  return s;
}

struct XorRun {
  std::size_t first_query = 0;
  int first_query_quadrant = 0;
  std::vector<double> accuracies;  // after each acquisition beyond the initial labels
};

/// Runs a strategy on the XOR pool from its initial labeled configuration.
inline XorRun run_xor(const XorScenario& s, const StrategyKind& kind, std::size_t iterations,
                      std::uint64_t seed = 0, double delta = 0.5) {
  PoolState state(s.pool, pool_kernel(s.pool, delta));
  LabelOracle oracle(s.pool_y);
  TestEvaluator eval(s.test, s.test_y, state.config());
  for (auto i : s.initial_labeled) {
    state.add_label(i, oracle.reveal(i));
    eval.add(state.point(i), oracle.reveal(i));
  }
  Rng rng(seed);
  XorRun run;
  run.first_query = select(state, kind, rng);
  run.first_query_quadrant = quadrant_of(state.point(run.first_query));
  const Label y = oracle.reveal(run.first_query);
  state.add_label(run.first_query, y);
  eval.add(state.point(run.first_query), y);
  run.accuracies.push_back(eval.accuracy());
  continue_learning_curve(state, oracle, eval, kind, rng, iterations, run.accuracies);
  return run;
}

/// Number of acquisitions until accuracy first reaches `level`, if ever.
inline std::optional<std::size_t> acquisitions_to_reach(std::span<const double> curve, double level) {
  for (std::size_t t = 0; t < curve.size(); ++t)
    if (curve[t] >= level) return t + 1;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Experiment runner

struct PreparedDataset {
  std::string name;
  std::vector<FoldData> folds;
  nlohmann::json provenance;  // grouping and per-fold pipelines
};

/// Splits a raw table into CV folds with the pipeline refitted per fold.
/// The split depends only on (master_seed, dataset name).
inline PreparedDataset prepare_dataset(const RawTable& t, const DatasetMeta& meta,
                                       std::size_t folds, std::uint64_t master_seed) {
  PreparedDataset pd;
  pd.name = t.name;
  const auto labels = t.label_values();
  const ClassGrouping g = binarize_classes(labels, meta.grouping);
  const auto y = binary_labels(t, g);
  std::vector<std::string> warnings;
  const auto assignment = cv_split(y, folds, mix_seed(master_seed, fnv1a(t.name), fnv1a("cv")), &warnings);
  std::vector<FittedPipeline> fitted;
  pd.folds = make_folds(t, y, {meta.dimension}, assignment, folds, &fitted);
  pd.provenance["name"] = t.name;
  pd.provenance["class_grouping"] = grouping_json(g);
  pd.provenance["split_warnings"] = warnings;
  for (const auto& fp : fitted) pd.provenance["folds"].push_back(fp.to_json());
  return pd;
}

struct ExperimentSettings {
  std::vector<StrategyKind> strategies;
  std::size_t repeats = 5;  // seeded strategies; DEAL always runs once per fold
  std::size_t max_iters = kMaxCurveLength;
  std::uint64_t master_seed = 0;
  double delta = 0.5;
};

struct LearningCurve {
  std::string dataset;
  Strategy strategy;
  std::size_t fold;
  std::size_t repeat;
  std::vector<double> accuracies;
};

struct AlcSummary {
  std::string dataset;
  Strategy strategy;
  std::size_t truncation = 0;
  double alc_mean = 0.0;
  double alc_std = 0.0;
  double full_accuracy = 0.0;
  std::size_t runs = 0;
};

struct CellFailure {
  std::string dataset;
  Strategy strategy;
  std::size_t fold;
  std::size_t repeat;
  std::string message;
};

struct ExperimentResult {
  std::vector<LearningCurve> curves;  // sorted by (dataset, strategy, fold, repeat)
  std::vector<AlcSummary> summary;
  std::vector<CellFailure> failures;
};

/// Seed of one (dataset, strategy, fold, repeat) cell.
inline std::uint64_t cell_seed(std::uint64_t master, const std::string& dataset, Strategy s,
                               std::size_t fold, std::size_t repeat) {
  return mix_seed(master, fnv1a(dataset), fnv1a(strategy_name(s)), fold, repeat);
}

/// Runs every (dataset, strategy, fold, repeat) cell on `jobs` threads.
/// Results depend only on the inputs, never on the job count.
inline ExperimentResult run_experiment(std::span<const PreparedDataset> datasets,
                                       const ExperimentSettings& settings, std::size_t jobs = 1) {
  struct Cell {
    std::size_t dataset, strategy, fold, repeat;
  };
  std::vector<Cell> cells;
  std::vector<std::size_t> lengths;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    std::size_t len = settings.max_iters;
    for (const auto& f : datasets[d].folds) len = std::min(len, f.train.rows());
    lengths.push_back(len);
    for (std::size_t s = 0; s < settings.strategies.size(); ++s) {
      const std::size_t reps = settings.strategies[s].seeded() ? settings.repeats : 1;
      for (std::size_t f = 0; f < datasets[d].folds.size(); ++f)
        for (std::size_t r = 0; r < reps; ++r) cells.push_back({d, s, f, r});
    }
  }

  std::vector<std::vector<double>> curves(cells.size());
  std::vector<std::optional<std::string>> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      const auto& ds = datasets[c.dataset];
      const auto& kind = settings.strategies[c.strategy];
      try {
        curves[i] = run_learning_curve(
            ds.folds[c.fold], kind, lengths[c.dataset],
            cell_seed(settings.master_seed, ds.name, kind.kind, c.fold, c.repeat), settings.delta);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }

  ExperimentResult res;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const auto& ds = datasets[c.dataset];
    const Strategy s = settings.strategies[c.strategy].kind;
    if (errors[i]) {
      res.failures.push_back({ds.name, s, c.fold, c.repeat, *errors[i]});
    } else {
      res.curves.push_back({ds.name, s, c.fold, c.repeat, std::move(curves[i])});
    }
  }

  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const auto& ds = datasets[d];
    bool failed = false;
    for (const auto& f : res.failures) failed |= f.dataset == ds.name;
    if (failed) continue;
    const double full = full_data_accuracy(ds.folds, settings.delta);
    std::vector<std::vector<std::vector<double>>> per_strategy(settings.strategies.size());
    for (const auto& c : res.curves) {
      if (c.dataset != ds.name) continue;
      for (std::size_t s = 0; s < settings.strategies.size(); ++s)
        if (settings.strategies[s].kind == c.strategy) per_strategy[s].push_back(c.accuracies);
    }
    std::vector<std::vector<double>> means;
    for (const auto& runs : per_strategy) means.push_back(mean_curve(runs));
    const std::size_t T = truncation_point(means, full);
    for (std::size_t s = 0; s < settings.strategies.size(); ++s) {
      AlcSummary row;
      row.dataset = ds.name;
      row.strategy = settings.strategies[s].kind;
      row.truncation = T;
      row.full_accuracy = full;
      row.runs = per_strategy[s].size();
      std::vector<double> scores;
      for (const auto& run : per_strategy[s]) scores.push_back(alc(run, T));
      row.alc_mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
      double ss = 0.0;
      for (double v : scores) ss += (v - row.alc_mean) * (v - row.alc_mean);
      row.alc_std = scores.size() > 1 ? std::sqrt(ss / static_cast<double>(scores.size() - 1)) : 0.0;
      res.summary.push_back(row);
    }
  }
  return res;
}

}  // namespace deal
