#pragma once

// Output formats: curves.csv, summary.csv, report.txt / report.json and SVG
// learning-curve plots.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deal/error.hpp"
#include "deal/harness.hpp"
#include "deal/preprocess.hpp"
#include "deal/stats.hpp"

namespace deal {

inline void write_curves_csv(std::ostream& out, std::span<const LearningCurve> curves) {
  out << "dataset,strategy,fold,repeat,iteration,accuracy\n";
  for (const auto& c : curves) {
    for (std::size_t t = 0; t < c.accuracies.size(); ++t) {
      out << csv_escape(c.dataset) << ',' << strategy_name(c.strategy) << ',' << c.fold << ','
          << c.repeat << ',' << (t + 1) << ',' << format_double(c.accuracies[t]) << '\n';
    }
  }
}

inline void write_summary_csv(std::ostream& out, std::span<const AlcSummary> rows) {
  out << "dataset,strategy,T,alc_mean,alc_std,full_acc\n";
  for (const auto& r : rows) {
    out << csv_escape(r.dataset) << ',' << strategy_name(r.strategy) << ',' << r.truncation << ','
        << format_double(r.alc_mean) << ',' << format_double(r.alc_std) << ','
        << format_double(r.full_accuracy) << '\n';
  }
}

namespace detail {

inline std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header,
                                                       std::initializer_list<const char*> required,
                                                       const std::string& what) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx[header[i]] = i;
  for (const char* r : required)
    if (!idx.contains(r)) throw input_error(what + ": missing column '" + r + "'");
  return idx;
}

inline double field_double(const std::vector<std::string>& rec, std::size_t i, std::size_t line,
                           const std::string& what) {
  auto v = parse_double(rec.at(i));
  if (!v) throw input_error(what + " line " + std::to_string(line) + ": bad number '" + rec[i] + "'");
  return *v;
}

inline std::size_t field_count(const std::vector<std::string>& rec, std::size_t i, std::size_t line,
                               const std::string& what) {
  const double v = field_double(rec, i, line, what);
  if (v < 0 || v != std::floor(v)) {
    throw input_error(what + " line " + std::to_string(line) + ": bad count '" + rec[i] + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace detail

/// Parses curves.csv back into curves, grouped by (dataset, strategy, fold, repeat)
/// in order of first appearance.
inline std::vector<LearningCurve> read_curves_csv(std::istream& in) {
  const std::string what = "curves.csv";
  auto records = read_csv(in);
  if (records.empty()) throw input_error(what + ": empty file");
  auto idx = detail::header_index(records.front(),
                                  {"dataset", "strategy", "fold", "repeat", "iteration", "accuracy"}, what);
  std::vector<LearningCurve> curves;
  std::map<std::tuple<std::string, std::string, std::size_t, std::size_t>, std::size_t> where;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != records.front().size()) {
      throw input_error(what + " line " + std::to_string(r + 1) + ": wrong field count");
    }
    const std::string ds = rec[idx["dataset"]];
    const Strategy s = parse_strategy(rec[idx["strategy"]]);
    const std::size_t fold = detail::field_count(rec, idx["fold"], r + 1, what);
    const std::size_t rep = detail::field_count(rec, idx["repeat"], r + 1, what);
    const std::size_t it = detail::field_count(rec, idx["iteration"], r + 1, what);
    const double acc = detail::field_double(rec, idx["accuracy"], r + 1, what);
    if (acc < 0.0 || acc > 1.0) throw input_error(what + " line " + std::to_string(r + 1) + ": accuracy outside [0,1]");
    auto key = std::make_tuple(ds, std::string(strategy_name(s)), fold, rep);
    auto [pos, inserted] = where.try_emplace(key, curves.size());
    if (inserted) curves.push_back({ds, s, fold, rep, {}});
    auto& c = curves[pos->second];
    if (it != c.accuracies.size() + 1) {
      throw input_error(what + " line " + std::to_string(r + 1) + ": iterations out of order");
    }
    c.accuracies.push_back(acc);
  }
  return curves;
}

inline std::vector<AlcSummary> read_summary_csv(std::istream& in) {
  const std::string what = "summary.csv";
  auto records = read_csv(in);
  if (records.empty()) throw input_error(what + ": empty file");
  auto idx = detail::header_index(records.front(),
                                  {"dataset", "strategy", "T", "alc_mean", "alc_std", "full_acc"}, what);
  std::vector<AlcSummary> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != records.front().size()) {
      throw input_error(what + " line " + std::to_string(r + 1) + ": wrong field count");
    }
    AlcSummary s;
    s.dataset = rec[idx["dataset"]];
    s.strategy = parse_strategy(rec[idx["strategy"]]);
    s.truncation = detail::field_count(rec, idx["T"], r + 1, what);
    s.alc_mean = detail::field_double(rec, idx["alc_mean"], r + 1, what);
    s.alc_std = detail::field_double(rec, idx["alc_std"], r + 1, what);
    s.full_accuracy = detail::field_double(rec, idx["full_acc"], r + 1, what);
    rows.push_back(s);
  }
  return rows;
}

/// Datasets x strategies ALC table from summary rows, preserving first-seen order.
struct AlcTable {
  std::vector<std::string> datasets;
  std::vector<std::string> strategies;
  std::vector<std::vector<double>> alc;  // NaN where missing
  std::vector<double> full_accuracy;
  std::vector<std::size_t> truncation;
};

inline AlcTable alc_table(std::span<const AlcSummary> rows) {
  AlcTable t;
  auto index_of = [](std::vector<std::string>& v, const std::string& s) {
    auto it = std::ranges::find(v, s);
    if (it != v.end()) return static_cast<std::size_t>(it - v.begin());
    v.push_back(s);
    return v.size() - 1;
  };
  for (const auto& r : rows) {
    index_of(t.datasets, r.dataset);
    index_of(t.strategies, std::string(strategy_name(r.strategy)));
  }
  t.alc.assign(t.datasets.size(), std::vector<double>(t.strategies.size(), std::nan("")));
  t.full_accuracy.assign(t.datasets.size(), 0.0);
  t.truncation.assign(t.datasets.size(), 0);
  for (const auto& r : rows) {
    const auto d = index_of(t.datasets, r.dataset);
    const auto s = index_of(t.strategies, std::string(strategy_name(r.strategy)));
    t.alc[d][s] = r.alc_mean;
    t.full_accuracy[d] = r.full_accuracy;
    t.truncation[d] = r.truncation;
  }
  return t;
}

struct ReportNotes {
  std::size_t ers_candidates = 0;  // 0: ERS not run
  std::size_t ers_eval = 0;
};

/// Runs the comparison when the table supports it (>= 2 strategies and >= 2
/// complete datasets).
inline std::optional<BenchmarkReport> compare_table(const AlcTable& t) {
  if (t.strategies.size() < 2 || t.datasets.size() < 2) return std::nullopt;
  for (const auto& row : t.alc)
    for (double v : row)
      if (std::isnan(v)) return std::nullopt;
  return compare(t.datasets, t.strategies, t.alc);
}

inline std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

inline std::string fmt_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", p);
  return buf;
}

inline void write_report_txt(std::ostream& out, const AlcTable& t,
                             const std::optional<BenchmarkReport>& rep, const ReportNotes& notes) {
  out << "Area under the learning curve (mean over folds x repeats)\n\n";
  out << std::left << std::setw(24) << "dataset" << std::right << std::setw(6) << "T" << std::setw(10)
      << "full_acc";
  for (const auto& s : t.strategies) out << std::setw(10) << s;
  out << '\n';
  for (std::size_t d = 0; d < t.datasets.size(); ++d) {
    out << std::left << std::setw(24) << t.datasets[d] << std::right << std::setw(6) << t.truncation[d]
        << std::setw(10) << fmt(t.full_accuracy[d]);
    for (std::size_t s = 0; s < t.strategies.size(); ++s) {
      std::string cell = std::isnan(t.alc[d][s]) ? "-" : fmt(t.alc[d][s]);
      if (rep) {
        if (rep->best[d] == s) cell += "*";
        else if (rep->second_best[d] == s) cell += "+";
      }
      out << std::setw(10) << cell;
    }
    out << '\n';
  }
  if (rep) {
    out << std::left << std::setw(40) << "mean rank" << std::right;
    for (double r : rep->rank_matrix.mean_ranks) out << std::setw(10) << fmt(r, 2);
    out << "\n\n(* best, + second best per dataset)\n\n";
    if (rep->friedman) {
      const auto& f = *rep->friedman;
      out << "Friedman test (N=" << t.datasets.size() << ", k=" << t.strategies.size() << ")\n";
      out << "  chi2_F = " << fmt(f.chi2, 4) << ", p = " << fmt_p(f.p_chi2) << '\n';
      out << "  Iman-Davenport F_F = " << fmt(f.iman_davenport_f, 4) << ", p = " << fmt_p(f.p_f) << "\n\n";
    }
    out << "Nemenyi critical differences:";
    for (std::size_t i = 0; i < kSignificanceLevels.size(); ++i) {
      out << "  alpha=" << fmt(kSignificanceLevels[i], 2) << ": " << fmt(rep->critical_difference[i]);
    }
    out << "\n\nPairwise mean-rank differences (significant at alpha):\n";
    for (const auto& p : rep->pairs) {
      out << "  " << t.strategies[p.a] << " vs " << t.strategies[p.b] << ": " << fmt(p.rank_difference, 3);
      std::string flags;
      for (std::size_t i = 0; i < kSignificanceLevels.size(); ++i)
        if (p.significant[i]) flags += (flags.empty() ? "" : ", ") + fmt(kSignificanceLevels[i], 2);
      out << (flags.empty() ? "  (n.s.)" : "  [" + flags + "]") << '\n';
    }
  } else {
    out << "\nComparison tests omitted (need at least two strategies and two complete datasets).\n";
  }
  if (notes.ers_candidates > 0) {
    out << "\nNote: ERS scores a random subset of " << notes.ers_candidates
        << " candidates per query, each against " << notes.ers_eval << " pool points.\n";
  }
}

inline nlohmann::json report_json(const AlcTable& t, const std::optional<BenchmarkReport>& rep,
                                  const ReportNotes& notes) {
  nlohmann::json j;
  j["datasets"] = t.datasets;
  j["strategies"] = t.strategies;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t d = 0; d < t.datasets.size(); ++d) {
    nlohmann::json r;
    r["dataset"] = t.datasets[d];
    r["truncation"] = t.truncation[d];
    r["full_accuracy"] = t.full_accuracy[d];
    nlohmann::json a;
    for (std::size_t s = 0; s < t.strategies.size(); ++s)
      a[t.strategies[s]] = std::isnan(t.alc[d][s]) ? nlohmann::json(nullptr) : nlohmann::json(t.alc[d][s]);
    r["alc"] = a;
    if (rep) {
      r["best"] = t.strategies[rep->best[d]];
      r["second_best"] = t.strategies[rep->second_best[d]];
    }
    rows.push_back(r);
  }
  j["alc"] = rows;
  if (rep) {
    nlohmann::json mr;
    for (std::size_t s = 0; s < t.strategies.size(); ++s) mr[t.strategies[s]] = rep->rank_matrix.mean_ranks[s];
    j["mean_ranks"] = mr;
    if (rep->friedman) {
      j["friedman"] = {{"chi2", rep->friedman->chi2},
                       {"p_chi2", rep->friedman->p_chi2},
                       {"iman_davenport_f", rep->friedman->iman_davenport_f},
                       {"p_f", rep->friedman->p_f}};
    }
    nlohmann::json cd;
    for (std::size_t i = 0; i < kSignificanceLevels.size(); ++i)
      cd[fmt(kSignificanceLevels[i], 2)] = rep->critical_difference[i];
    j["nemenyi_cd"] = cd;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : rep->pairs) {
      nlohmann::json sig;
      for (std::size_t i = 0; i < kSignificanceLevels.size(); ++i) sig[fmt(kSignificanceLevels[i], 2)] = p.significant[i];
      pairs.push_back({{"a", t.strategies[p.a]},
                       {"b", t.strategies[p.b]},
                       {"rank_difference", p.rank_difference},
                       {"significant", sig}});
    }
    j["pairwise"] = pairs;
  }
  if (notes.ers_candidates > 0) {
    j["ers_subsampling"] = {{"candidates", notes.ers_candidates}, {"eval", notes.ers_eval}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// SVG

struct CurveSeries {
  std::string label;
  std::vector<double> mean;
  std::vector<double> std;  // empty: no band
};

inline const char* series_color(std::size_t i) {
  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                           "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors[i % 8];
}

/// Learning curves with optional +-1 std bands and a horizontal reference line.
/// One <polyline> per series.
inline std::string learning_curve_svg(const std::string& title, std::span<const CurveSeries> series,
                                      std::optional<double> reference = std::nullopt) {
  constexpr double W = 640, H = 420, L = 60, R = 130, T = 40, B = 50;
  std::size_t len = 1;
  for (const auto& s : series) len = std::max(len, s.mean.size());
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](std::size_t t) {
    return len <= 1 ? L + pw / 2.0 : L + pw * static_cast<double>(t) / static_cast<double>(len - 1);
  };
  auto py = [&](double acc) { return T + ph * (1.0 - std::clamp(acc, 0.0, 1.0)); };
  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << title << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double acc = i / 5.0;
    o << "<line x1=\"" << L - 4 << "\" y1=\"" << py(acc) << "\" x2=\"" << L << "\" y2=\"" << py(acc)
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << L - 8 << "\" y=\"" << py(acc) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(acc, 1) << "</text>\n";
  }
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">labeled samples (1.."
    << len << ")</text>\n";
  o << "<text x=\"16\" y=\"" << T + ph / 2 << "\" transform=\"rotate(-90 16 " << T + ph / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">test accuracy</text>\n";
  if (reference) {
    o << "<line x1=\"" << L << "\" y1=\"" << py(*reference) << "\" x2=\"" << L + pw << "\" y2=\""
      << py(*reference) << "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (s.mean.empty()) continue;
    if (!s.std.empty()) {
      o << "<polygon fill=\"" << series_color(i) << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (std::size_t t = 0; t < s.mean.size(); ++t) o << px(t) << ',' << py(s.mean[t] + s.std[t]) << ' ';
      for (std::size_t t = s.mean.size(); t-- > 0;) o << px(t) << ',' << py(s.mean[t] - s.std[t]) << ' ';
      o << "\"/>\n";
    }
    o << "<polyline fill=\"none\" stroke=\"" << series_color(i) << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t t = 0; t < s.mean.size(); ++t) o << px(t) << ',' << py(s.mean[t]) << ' ';
    o << "\"/>\n";
    const double ly = T + 16.0 + 18.0 * static_cast<double>(i);
    o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << series_color(i) << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

/// Mean and sample std per iteration across runs (truncated to the shortest run).
inline CurveSeries summarize_runs(std::string label, std::span<const std::vector<double>> runs) {
  CurveSeries s{std::move(label), mean_curve(runs), {}};
  s.std.assign(s.mean.size(), 0.0);
  if (runs.size() > 1) {
    for (const auto& r : runs)
      for (std::size_t t = 0; t < s.mean.size(); ++t) s.std[t] += (r[t] - s.mean[t]) * (r[t] - s.mean[t]);
    for (auto& v : s.std) v = std::sqrt(v / static_cast<double>(runs.size() - 1));
  }
  return s;
}

}  // namespace deal
