#pragma once

// Pool state and the query-selection strategies: DEAL, uncertainty sampling
// (US), error-reduction sampling (ERS) and random sampling (RS).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "deal/error.hpp"
#include "deal/kde.hpp"
#include "deal/matrix.hpp"
#include "deal/risk.hpp"
#include "deal/rng.hpp"

namespace deal {

/// Sample standard deviation (divisor n-1) of every column.
inline std::vector<double> column_std(const Matrix& x) {
  const std::size_t n = x.rows();
  std::vector<double> mean(x.cols(), 0.0), var(x.cols(), 0.0);
  if (n < 2) throw std::domain_error("column_std: need at least two rows");
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) mean[c] += x(r, c);
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = x(r, c) - mean[c];
      var[c] += d * d;
    }
  for (auto& v : var) v = std::sqrt(v / static_cast<double>(n - 1));
  return var;
}

/// Kernel configuration for a training pool: normal reference bandwidth over
/// every pool point, labeled or not.
inline KernelConfig pool_kernel(const Matrix& pool, double delta = 0.5) {
  const auto sd = column_std(pool);
  return KernelConfig(normal_reference_bandwidth(pool.rows(), pool.cols(), sd), pool.cols(),
                      delta);
}

/// Hidden labels of a training fold. Only the harness holds one; strategies see
/// a label once it has been revealed into the PoolState.
class LabelOracle {
 public:
  explicit LabelOracle(std::vector<Label> labels) : labels_(std::move(labels)) {}

  Label reveal(std::size_t index) const { return labels_.at(index); }
  std::size_t size() const noexcept { return labels_.size(); }

  bool has_both_classes() const noexcept {
    const bool pos = std::ranges::find(labels_, Label::positive) != labels_.end();
    const bool neg = std::ranges::find(labels_, Label::negative) != labels_.end();
    return pos && neg;
  }

 private:
  std::vector<Label> labels_;
};

/// Labeled/unlabeled partition of a training fold, with the per-point class
/// evidence from the current labeled set and the fixed pool density.
class PoolState {
 public:
  PoolState(Matrix points, KernelConfig cfg)
      : points_(std::move(points)), cfg_(cfg), evidence_(points_.rows()) {
    if (points_.cols() != cfg_.dimension) throw std::invalid_argument("dimension mismatch");
    const auto rows = points_.row_views();
    density_.reserve(points_.rows());
    for (std::size_t i = 0; i < points_.rows(); ++i) {
      density_.push_back(density_estimate(points_.row(i), rows, cfg_));
    }
    init_unlabeled();
  }

  PoolState(Matrix points, KernelConfig cfg, std::vector<double> density)
      : points_(std::move(points)), cfg_(cfg), evidence_(points_.rows()),
        density_(std::move(density)) {
    if (points_.cols() != cfg_.dimension) throw std::invalid_argument("dimension mismatch");
    if (density_.size() != points_.rows()) throw std::invalid_argument("density size mismatch");
    init_unlabeled();
  }

  const KernelConfig& config() const noexcept { return cfg_; }
  const Matrix& points() const noexcept { return points_; }
  FeatureVector point(std::size_t i) const noexcept { return points_.row(i); }
  std::size_t size() const noexcept { return points_.rows(); }

  const std::vector<LabeledPoint>& labeled() const noexcept { return labeled_; }
  const std::vector<std::size_t>& labeled_indices() const noexcept { return labeled_idx_; }
  /// Unlabeled pool indices, ascending.
  const std::vector<std::size_t>& unlabeled() const noexcept { return unlabeled_; }

  const ClassEvidence& evidence_at(std::size_t i) const { return evidence_.at(i); }
  double density_at(std::size_t i) const { return density_.at(i); }

  bool is_unlabeled(std::size_t i) const {
    return std::ranges::binary_search(unlabeled_, i);
  }

  bool has_both_classes() const noexcept {
    bool pos = false, neg = false;
    for (const auto& p : labeled_) (p.y == Label::positive ? pos : neg) = true;
    return pos && neg;
  }

  /// Moves pool point `index` into the labeled set. Evidence caches are updated
  /// with the single new kernel term.
  void add_label(std::size_t index, Label y) {
    auto it = std::ranges::lower_bound(unlabeled_, index);
    if (it == unlabeled_.end() || *it != index) {
      throw std::invalid_argument("add_label: index is not in the unlabeled pool");
    }
    unlabeled_.erase(it);
    const auto xi = points_.row(index);
    labeled_.push_back({std::vector<double>(xi.begin(), xi.end()), y});
    labeled_idx_.push_back(index);
    for (std::size_t j = 0; j < points_.rows(); ++j) {
      evidence_[j][y] += evidence_weight(points_.row(j), xi, cfg_);
    }
  }

 private:
  void init_unlabeled() {
    unlabeled_.resize(points_.rows());
    for (std::size_t i = 0; i < unlabeled_.size(); ++i) unlabeled_[i] = i;
  }

  Matrix points_;
  KernelConfig cfg_;
  std::vector<ClassEvidence> evidence_;
  std::vector<double> density_;
  std::vector<LabeledPoint> labeled_;
  std::vector<std::size_t> labeled_idx_;
  std::vector<std::size_t> unlabeled_;
};

enum class Strategy { deal, us, ers, rs };

inline std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::deal: return "DEAL";
    case Strategy::us: return "US";
    case Strategy::ers: return "ERS";
    case Strategy::rs: return "RS";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view name) {
  std::string lower(name);
  std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "deal") return Strategy::deal;
  if (lower == "us") return Strategy::us;
  if (lower == "ers") return Strategy::ers;
  if (lower == "rs") return Strategy::rs;
  throw input_error("unknown strategy '" + std::string(name) + "'");
}

struct StrategyKind {
  Strategy kind = Strategy::deal;
  // ERS cost control: candidates scored per query, pool points averaged per score.
  std::size_t candidate_subsample = 250;
  std::size_t eval_subsample = 250;
  // US margin on the delta-regularized estimate instead of the plug-in ratio.
  bool us_regularized = false;

  bool seeded() const noexcept { return kind != Strategy::deal; }
};

namespace detail {

inline void require_candidates(const PoolState& state) {
  if (state.unlabeled().empty()) throw empty_pool_error("no unlabeled points left");
}

}  // namespace detail

inline RiskBreakdown candidate_tuv(const PoolState& state, std::size_t index) {
  return tuv(second_order(state.evidence_at(index), state.config()), state.density_at(index));
}

/// Unlabeled index with the largest training utility value; lowest index on ties.
inline std::size_t deal_select(const PoolState& state) {
  detail::require_candidates(state);
  std::size_t best = state.unlabeled().front();
  double best_value = -1.0;
  for (std::size_t i : state.unlabeled()) {
    const double v = candidate_tuv(state, i).tuv;
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

/// Posterior estimate used by uncertainty sampling.
inline double us_estimate(const PoolState& state, std::size_t index, bool regularized) {
  if (regularized) return point_estimate(state.evidence_at(index), state.config());
  return parzen_posterior(state.point(index), state.labeled(), state.config());
}

/// Least-confident unlabeled point: smallest |p(+1|x) - 1/2|, lowest index on ties.
inline std::size_t us_select(const PoolState& state, bool regularized = false) {
  detail::require_candidates(state);
  std::size_t best = state.unlabeled().front();
  double best_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i : state.unlabeled()) {
    const double m = std::abs(us_estimate(state, i, regularized) - 0.5);
    if (m < best_margin) {
      best_margin = m;
      best = i;
    }
  }
  return best;
}

inline std::size_t rs_select(const PoolState& state, Rng& rng) {
  detail::require_candidates(state);
  return state.unlabeled()[uniform_index(rng, state.unlabeled().size())];
}

inline std::size_t rs_select(const PoolState& state, std::uint64_t seed) {
  Rng rng(seed);
  return rs_select(state, rng);
}

/// Expected 0/1 pool risk after hypothetically labeling `candidate`:
///   sum_y p(y|x) * mean_{u in eval} min(q+(u), 1 - q+(u)),
/// q+ being the regularized estimate with (x, y) added to the labeled set.
inline double ers_objective(const PoolState& state, std::size_t candidate,
                            std::span<const std::size_t> eval) {
  const auto& cfg = state.config();
  const double p_pos = point_estimate(state.evidence_at(candidate), cfg);
  const auto x = state.point(candidate);
  double risk_pos = 0.0, risk_neg = 0.0;
  for (std::size_t u : eval) {
    const ClassEvidence& ev = state.evidence_at(u);
    const double w = evidence_weight(state.point(u), x, cfg);
    const double denom = 2.0 * cfg.delta + ev.k_pos + ev.k_neg + w;
    const double q_if_pos = (cfg.delta + ev.k_pos + w) / denom;
    const double q_if_neg = (cfg.delta + ev.k_pos) / denom;
    risk_pos += std::min(q_if_pos, 1.0 - q_if_pos);
    risk_neg += std::min(q_if_neg, 1.0 - q_if_neg);
  }
  if (eval.empty()) return 0.0;
  const double n = static_cast<double>(eval.size());
  return p_pos * (risk_pos / n) + (1.0 - p_pos) * (risk_neg / n);
}

/// Error-reduction sampling over a random candidate subset. The evaluation set
/// for candidate x is the first min(eval_subsample, |U|-1) points of one shared
/// random ordering of U with x removed, so all candidates are scored on nearly
/// the same points. With both subsample sizes >= |U| this is exhaustive.
inline std::size_t ers_select(const PoolState& state, const StrategyKind& kind, Rng& rng) {
  detail::require_candidates(state);
  const auto& pool = state.unlabeled();
  if (pool.size() == 1) return pool.front();
  if (kind.candidate_subsample == 0 || kind.eval_subsample == 0) {
    throw std::invalid_argument("ers_select: subsample sizes must be >= 1");
  }
  auto candidates = sample_without_replacement<std::size_t>(
      pool, std::min(kind.candidate_subsample, pool.size()), rng);
  std::ranges::sort(candidates);
  const auto eval_order = sample_without_replacement<std::size_t>(
      pool, std::min(kind.eval_subsample + 1, pool.size()), rng);
  const std::size_t eval_size = std::min(kind.eval_subsample, pool.size() - 1);

  std::vector<std::size_t> eval;
  eval.reserve(eval_size);
  std::size_t best = candidates.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t c : candidates) {
    eval.clear();
    for (std::size_t u : eval_order) {
      if (eval.size() == eval_size) break;
      if (u != c) eval.push_back(u);
    }
    const double score = ers_objective(state, c, eval);
    if (score < best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

inline std::size_t ers_select(const PoolState& state, const StrategyKind& kind,
                              std::uint64_t seed) {
  Rng rng(seed);
  return ers_select(state, kind, rng);
}

/// Next query for the strategy. `rng` is consumed only by RS and ERS.
inline std::size_t select(const PoolState& state, const StrategyKind& kind, Rng& rng) {
  switch (kind.kind) {
    case Strategy::deal: return deal_select(state);
    case Strategy::us: return us_select(state, kind.us_regularized);
    case Strategy::ers: return ers_select(state, kind, rng);
    case Strategy::rs: return rs_select(state, rng);
  }
  throw std::logic_error("unreachable");
}

/// Start-up phase on a fresh fold. Seeded strategies query uniformly at random
/// until both classes are labeled; DEAL has no separate phase (on an empty
/// labeled set its utility is proportional to density). Each acquisition is
/// revealed into `state` and reported through `on_acquire`.
inline std::vector<std::size_t> initialize(
    PoolState& state, const LabelOracle& oracle, const StrategyKind& kind, Rng& rng,
    const std::function<void(std::size_t)>& on_acquire = {}) {
  if (!oracle.has_both_classes()) {
    throw std::invalid_argument("initialize: the fold contains a single class");
  }
  if (!state.labeled().empty()) throw std::invalid_argument("initialize: fold already labeled");
  std::vector<std::size_t> queries;
  if (!kind.seeded()) return queries;
  while (!state.has_both_classes()) {
    const std::size_t q = rs_select(state, rng);
    state.add_label(q, oracle.reveal(q));
    queries.push_back(q);
    if (on_acquire) on_acquire(q);
  }
  return queries;
}

}  // namespace deal
