#pragma once

// Dataset ingestion and preprocessing: CSV + JSON sidecar loading, categorical
// indicator encoding, mean imputation, standardization, binary class grouping,
// PCA and scree-plot dimension selection.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "deal/error.hpp"
#include "deal/kde.hpp"
#include "deal/matrix.hpp"

namespace deal {

using Cell = std::optional<std::string>;

// ---------------------------------------------------------------------------
// CSV

/// RFC-4180 reader. Quoted fields may contain separators, doubled quotes and
/// line breaks. A trailing newline does not produce an empty record.
inline std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  char c;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || !field.empty()) {
          throw input_error("csv line " + std::to_string(line) + ": stray quote");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') break;
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw input_error("csv: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Raw tables and sidecars

enum class ColumnKind { continuous, categorical, label, ignore };

inline ColumnKind parse_column_kind(const std::string& s) {
  if (s == "continuous") return ColumnKind::continuous;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "label") return ColumnKind::label;
  if (s == "ignore") return ColumnKind::ignore;
  throw input_error("unknown column kind '" + s + "'");
}

/// Class grouping: classes listed under "+1" map to +1; "-1" lists the
/// negative side (omitted: every remaining class).
struct GroupingSpec {
  std::vector<std::string> positive;
  std::optional<std::vector<std::string>> negative;
};

struct DatasetMeta {
  std::string name;
  std::string label_column;
  std::string missing_token;  // cells equal to this are missing
  std::map<std::string, ColumnKind> kinds;  // undeclared columns are continuous
  std::optional<GroupingSpec> grouping;     // nullopt: automatic balancing
  std::optional<std::size_t> dimension;     // nullopt: scree-plot selection
};

inline DatasetMeta parse_meta(const nlohmann::json& j) {
  DatasetMeta m;
  try {
    m.name = j.value("name", std::string{});
    if (!j.contains("label")) throw input_error("sidecar: missing 'label' column");
    m.label_column = j.at("label").get<std::string>();
    m.missing_token = j.value("missing", std::string{});
    if (j.contains("columns")) {
      for (const auto& [col, kind] : j.at("columns").items()) {
        m.kinds[col] = parse_column_kind(kind.get<std::string>());
      }
    }
    if (j.contains("grouping") && !j.at("grouping").is_null()) {
      const auto& g = j.at("grouping");
      if (g.is_string()) {
        if (g.get<std::string>() != "auto") throw input_error("sidecar: grouping must be 'auto' or an object");
      } else {
        GroupingSpec spec;
        if (!g.contains("+1")) throw input_error("sidecar: grouping needs a '+1' list");
        spec.positive = g.at("+1").get<std::vector<std::string>>();
        if (g.contains("-1")) spec.negative = g.at("-1").get<std::vector<std::string>>();
        m.grouping = std::move(spec);
      }
    }
    if (j.contains("dimension") && !j.at("dimension").is_null()) {
      m.dimension = j.at("dimension").get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("sidecar: ") + e.what());
  }
  m.kinds[m.label_column] = ColumnKind::label;
  return m;
}

inline DatasetMeta load_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open sidecar " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("sidecar " + path + ": " + e.what());
  }
  return parse_meta(j);
}

struct ColumnDescriptor {
  std::string name;
  ColumnKind kind;
};

struct RawTable {
  std::string name;
  std::vector<ColumnDescriptor> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t label_index() const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].kind == ColumnKind::label) return i;
    throw input_error("table has no label column");
  }

  std::vector<std::string> label_values() const {
    const std::size_t li = label_index();
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r][li]) {
        throw input_error("row " + std::to_string(r + 2) + ": missing label");
      }
      out.push_back(*rows[r][li]);
    }
    return out;
  }
};

/// Builds a table from parsed CSV records (first record is the header).
inline RawTable make_raw_table(const std::vector<std::vector<std::string>>& records,
                               const DatasetMeta& meta) {
  if (records.empty()) throw input_error("csv: empty file");
  RawTable t;
  t.name = meta.name;
  const auto& header = records.front();
  std::size_t labels = 0, features = 0;
  for (const auto& h : header) {
    auto it = meta.kinds.find(h);
    const ColumnKind k = it == meta.kinds.end() ? ColumnKind::continuous : it->second;
    t.columns.push_back({h, k});
    if (k == ColumnKind::label) ++labels;
    if (k == ColumnKind::continuous || k == ColumnKind::categorical) ++features;
  }
  if (labels != 1) throw input_error("csv: label column '" + meta.label_column + "' not found");
  if (features == 0) throw input_error("csv: no feature columns");
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec.front().empty()) continue;  // blank line
    if (rec.size() != header.size()) {
      throw input_error("csv row " + std::to_string(r + 1) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(rec.size()));
    }
    std::vector<Cell> row;
    row.reserve(rec.size());
    for (const auto& f : rec) {
      if (f == meta.missing_token) row.emplace_back(std::nullopt);
      else row.emplace_back(f);
    }
    t.rows.push_back(std::move(row));
  }
  std::set<std::string> distinct;
  for (const auto& v : t.label_values()) distinct.insert(v);
  if (distinct.size() < 2) throw input_error("csv: label column has fewer than 2 classes");
  return t;
}

inline RawTable load_raw_table(const std::string& csv_path, const DatasetMeta& meta) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw input_error("cannot open " + csv_path);
  RawTable t = make_raw_table(read_csv(in), meta);
  if (t.name.empty()) {
    auto base = csv_path.substr(csv_path.find_last_of("/\\") + 1);
    t.name = base.substr(0, base.find('.'));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Column transforms

/// Indicator encoding of one categorical column. Outcomes are ordered with the
/// missing outcome first, then lexicographically; the last is the reference.
struct CategoricalEncoding {
  std::vector<Cell> indicators;  // one output column per entry
  Cell reference;

  std::vector<double> encode(const Cell& v) const {
    std::vector<double> out(indicators.size(), 0.0);
    for (std::size_t i = 0; i < indicators.size(); ++i)
      if (indicators[i] == v) out[i] = 1.0;
    return out;
  }
};

inline CategoricalEncoding encode_categorical(std::span<const Cell> column) {
  // std::optional orders nullopt before any value.
  std::set<Cell> outcomes(column.begin(), column.end());
  if (outcomes.size() < 2) {
    throw std::invalid_argument("encode_categorical: column has a single outcome");
  }
  CategoricalEncoding enc;
  enc.indicators.assign(outcomes.begin(), outcomes.end());
  enc.reference = enc.indicators.back();
  enc.indicators.pop_back();
  return enc;
}

/// Mean of observed numeric cells; throws if every cell is missing.
inline double observed_mean(std::span<const std::optional<double>> column) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : column)
    if (v) {
      sum += *v;
      ++n;
    }
  if (n == 0) throw std::invalid_argument("impute_continuous: every cell is missing");
  return sum / static_cast<double>(n);
}

inline std::vector<double> impute_continuous(std::span<const std::optional<double>> column) {
  const double mean = observed_mean(column);
  std::vector<double> out;
  out.reserve(column.size());
  for (const auto& v : column) out.push_back(v.value_or(mean));
  return out;
}

struct StandardizeStats {
  std::vector<double> mean;  // per kept column
  std::vector<double> scale;
  std::vector<std::size_t> kept;     // input column indices retained
  std::vector<std::size_t> dropped;  // zero-variance columns

  Matrix apply(const Matrix& x) const {
    Matrix out(x.rows(), kept.size());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t j = 0; j < kept.size(); ++j)
        out(r, j) = (x(r, kept[j]) - mean[j]) / scale[j];
    return out;
  }
};

/// Centers each column and scales it to unit sample variance (divisor n-1).
/// Zero-variance columns are dropped and listed in the stats.
inline std::pair<Matrix, StandardizeStats> standardize(const Matrix& x) {
  if (x.rows() < 2) throw std::invalid_argument("standardize: need at least two rows");
  StandardizeStats st;
  const double n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) m += x(r, c);
    m /= n;
    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) ss += (x(r, c) - m) * (x(r, c) - m);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) {
      st.dropped.push_back(c);
      continue;
    }
    st.kept.push_back(c);
    st.mean.push_back(m);
    st.scale.push_back(sd);
  }
  return {st.apply(x), st};
}

// ---------------------------------------------------------------------------
// Class grouping

struct ClassGrouping {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  double imbalance = 0.0;  // |n+ - n-| / n

  Label map(const std::string& cls) const {
    if (std::ranges::find(positive, cls) != positive.end()) return Label::positive;
    if (std::ranges::find(negative, cls) != negative.end()) return Label::negative;
    throw input_error("class '" + cls + "' is not covered by the grouping");
  }
};

/// Maps original classes to {-1, +1}. Two classes: lexicographically smaller is
/// -1. Explicit spec: applied as given. Otherwise classes are taken by
/// descending count (name breaks ties) and each is added to the currently
/// lighter side, +1 on equal weight.
inline ClassGrouping binarize_classes(std::span<const std::string> labels,
                                      const std::optional<GroupingSpec>& spec) {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  if (counts.size() < 2) throw input_error("binarize_classes: need at least two classes");
  ClassGrouping g;
  if (spec) {
    std::set<std::string> pos(spec->positive.begin(), spec->positive.end());
    for (const auto& c : pos)
      if (!counts.contains(c)) throw input_error("grouping references unknown class '" + c + "'");
    std::set<std::string> neg;
    if (spec->negative) {
      for (const auto& c : *spec->negative) {
        if (!counts.contains(c)) throw input_error("grouping references unknown class '" + c + "'");
        if (pos.contains(c)) throw input_error("grouping puts class '" + c + "' on both sides");
        neg.insert(c);
      }
      for (const auto& [c, n] : counts)
        if (!pos.contains(c) && !neg.contains(c))
          throw input_error("grouping does not cover class '" + c + "'");
    } else {
      for (const auto& [c, n] : counts)
        if (!pos.contains(c)) neg.insert(c);
    }
    g.positive.assign(pos.begin(), pos.end());
    g.negative.assign(neg.begin(), neg.end());
  } else if (counts.size() == 2) {
    g.negative.push_back(counts.begin()->first);
    g.positive.push_back(std::next(counts.begin())->first);
  } else {
    std::vector<std::pair<std::string, std::size_t>> order(counts.begin(), counts.end());
    std::ranges::stable_sort(order, [](const auto& a, const auto& b) { return a.second > b.second; });
    std::size_t wpos = 0, wneg = 0;
    for (const auto& [c, n] : order) {
      if (wpos <= wneg) {
        g.positive.push_back(c);
        wpos += n;
      } else {
        g.negative.push_back(c);
        wneg += n;
      }
    }
  }
  if (g.positive.empty() || g.negative.empty()) throw input_error("grouping leaves one side empty");
  std::size_t npos = 0;
  for (const auto& c : g.positive) npos += counts[c];
  const double n = static_cast<double>(labels.size());
  g.imbalance = std::abs(2.0 * static_cast<double>(npos) - n) / n;
  return g;
}

// ---------------------------------------------------------------------------
// PCA

struct PcaResult {
  std::vector<double> eigenvalues;  // all, descending
  Matrix basis;                     // p x d, columns are unit-norm components
  Matrix projected;                 // n x d
  std::size_t rank = 0;
};

/// Eigendecomposition of the sample covariance (divisor n-1) of x, which is
/// assumed column-centered.
inline std::pair<std::vector<double>, Eigen::MatrixXd> covariance_eigen(const Matrix& x) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto p = static_cast<Eigen::Index>(x.cols());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xm(
      x.data().data(), n, p);
  const Eigen::MatrixXd cov = (xm.transpose() * xm) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("pca: eigensolver failed");
  std::vector<double> values(static_cast<std::size_t>(p));
  Eigen::MatrixXd vectors(p, p);
  // Eigen returns ascending order.
  for (Eigen::Index k = 0; k < p; ++k) {
    values[static_cast<std::size_t>(k)] = std::max(0.0, solver.eigenvalues()(p - 1 - k));
    Eigen::VectorXd v = solver.eigenvectors().col(p - 1 - k);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < p; ++i)
      if (std::abs(v(i)) > std::abs(v(arg)) + 1e-12) arg = i;
    if (v(arg) < 0) v = -v;
    vectors.col(k) = v;
  }
  return {values, vectors};
}

inline std::size_t numeric_rank(std::span<const double> eigenvalues) {
  if (eigenvalues.empty() || eigenvalues.front() <= 0.0) return 0;
  const double tol = eigenvalues.front() * 1e-10;
  return static_cast<std::size_t>(
      std::ranges::count_if(eigenvalues, [tol](double v) { return v > tol; }));
}

/// Projects centered x onto its d leading principal components. Each
/// component is sign-normalized so that its largest-magnitude entry is positive.
inline PcaResult pca(const Matrix& x, std::size_t d) {
  auto [values, vectors] = covariance_eigen(x);
  PcaResult res;
  res.eigenvalues = values;
  res.rank = numeric_rank(values);
  if (d == 0 || d > res.rank) {
    throw std::invalid_argument("pca: d=" + std::to_string(d) + " exceeds rank " +
                                std::to_string(res.rank));
  }
  res.basis = Matrix(x.cols(), d);
  for (std::size_t i = 0; i < x.cols(); ++i)
    for (std::size_t k = 0; k < d; ++k)
      res.basis(i, k) = vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  res.projected = Matrix(x.rows(), d);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t k = 0; k < d; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.cols(); ++i) acc += x(r, i) * res.basis(i, k);
      res.projected(r, k) = acc;
    }
  return res;
}

/// Profile log-likelihood of splitting the scree at q: eigenvalues 1..q and
/// q+1..p as two normal samples with separate means and a pooled variance.
inline double scree_profile_loglik(std::span<const double> ev, std::size_t q) {
  const std::size_t p = ev.size();
  auto mean = [&](std::size_t lo, std::size_t hi) {
    return std::accumulate(ev.begin() + lo, ev.begin() + hi, 0.0) / static_cast<double>(hi - lo);
  };
  const double m1 = mean(0, q), m2 = mean(q, p);
  double ss = 0.0;
  for (std::size_t i = 0; i < q; ++i) ss += (ev[i] - m1) * (ev[i] - m1);
  for (std::size_t i = q; i < p; ++i) ss += (ev[i] - m2) * (ev[i] - m2);
  const double var = ss / static_cast<double>(p);
  if (var <= 0.0) return std::numeric_limits<double>::infinity();
  return -0.5 * static_cast<double>(p) * (std::log(2.0 * std::numbers::pi * var) + 1.0);
}

/// Scree elbow maximizing the two-group profile likelihood, floored at 2.
inline std::size_t select_dimension(std::span<const double> eigenvalues) {
  if (eigenvalues.size() < 2) throw std::invalid_argument("select_dimension: need >= 2 eigenvalues");
  // The likelihood is scale invariant; normalizing keeps the pooled variance
  // away from underflow for tiny spectra.
  const double top = eigenvalues.front();
  std::vector<double> ev(eigenvalues.begin(), eigenvalues.end());
  if (top > 0.0)
    for (auto& v : ev) v /= top;
  std::size_t best_q = 1;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 1; q < ev.size(); ++q) {
    const double ll = scree_profile_loglik(ev, q);
    if (ll > best) {
      best = ll;
      best_q = q;
    }
  }
  return std::max<std::size_t>(2, best_q);
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineOptions {
  std::optional<std::size_t> dimension;
};

/// Transformation fitted on a set of rows; applying it to other rows (e.g. a
/// held-out fold) uses the fitted statistics only.
struct FittedPipeline {
  struct FeatureColumn {
    std::size_t source;
    ColumnKind kind;
    double impute_mean = 0.0;                    // continuous
    std::optional<CategoricalEncoding> encoding;  // categorical
  };

  std::vector<ColumnDescriptor> columns;
  std::vector<FeatureColumn> features;
  std::vector<std::string> encoded_names;
  StandardizeStats standardization;
  std::vector<double> eigenvalues;
  Matrix basis;
  std::size_t dimension = 0;
  bool dimension_selected = false;
  std::vector<std::string> warnings;

  Matrix encode(const RawTable& t, std::span<const std::size_t> rows) const {
    Matrix out(rows.size(), encoded_names.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& row = t.rows.at(rows[r]);
      std::size_t c = 0;
      for (const auto& f : features) {
        const Cell& cell = row[f.source];
        if (f.kind == ColumnKind::continuous) {
          double v = f.impute_mean;
          if (cell) {
            auto parsed = parse_double(*cell);
            if (!parsed) {
              throw input_error("row " + std::to_string(rows[r] + 2) + ", column '" +
                                t.columns[f.source].name + "': not a number: '" + *cell + "'");
            }
            v = *parsed;
          }
          out(r, c++) = v;
        } else {
          for (double ind : f.encoding->encode(cell)) out(r, c++) = ind;
        }
      }
    }
    return out;
  }

  Matrix transform(const RawTable& t, std::span<const std::size_t> rows) const {
    const Matrix std_x = standardization.apply(encode(t, rows));
    Matrix out(rows.size(), dimension);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t k = 0; k < dimension; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < std_x.cols(); ++i) acc += std_x(r, i) * basis(i, k);
        out(r, k) = acc;
      }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    auto cell_json = [](const Cell& c) { return c ? nlohmann::json(*c) : nlohmann::json(nullptr); };
    nlohmann::json enc = nlohmann::json::array();
    for (const auto& f : features) {
      nlohmann::json e;
      e["column"] = columns[f.source].name;
      if (f.kind == ColumnKind::continuous) {
        e["kind"] = "continuous";
        e["impute_mean"] = f.impute_mean;
      } else {
        e["kind"] = "categorical";
        nlohmann::json ind = nlohmann::json::array();
        for (const auto& o : f.encoding->indicators) ind.push_back(cell_json(o));
        e["indicators"] = ind;
        e["reference"] = cell_json(f.encoding->reference);
      }
      enc.push_back(e);
    }
    j["encoding"] = enc;
    j["encoded_columns"] = encoded_names;
    nlohmann::json st;
    std::vector<std::string> kept, dropped;
    for (auto k : standardization.kept) kept.push_back(encoded_names[k]);
    for (auto k : standardization.dropped) dropped.push_back(encoded_names[k]);
    st["columns"] = kept;
    st["mean"] = standardization.mean;
    st["scale"] = standardization.scale;
    st["dropped_constant"] = dropped;
    j["standardization"] = st;
    nlohmann::json p;
    p["eigenvalues"] = eigenvalues;
    p["dimension"] = dimension;
    p["dimension_rule"] = dimension_selected ? "scree profile likelihood, min 2" : "fixed";
    nlohmann::json b = nlohmann::json::array();
    for (std::size_t k = 0; k < dimension; ++k) {
      std::vector<double> col(basis.rows());
      for (std::size_t i = 0; i < basis.rows(); ++i) col[i] = basis(i, k);
      b.push_back(col);
    }
    p["components"] = b;
    j["pca"] = p;
    j["warnings"] = warnings;
    return j;
  }
};

inline FittedPipeline fit_pipeline(const RawTable& t, std::span<const std::size_t> rows,
                                   const PipelineOptions& opts = {}) {
  FittedPipeline fp;
  fp.columns = t.columns;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    const auto& col = t.columns[c];
    if (col.kind == ColumnKind::continuous) {
      std::vector<std::optional<double>> values;
      values.reserve(rows.size());
      for (auto r : rows) {
        const Cell& cell = t.rows[r][c];
        if (!cell) {
          values.emplace_back(std::nullopt);
          continue;
        }
        auto v = parse_double(*cell);
        if (!v) {
          throw input_error("row " + std::to_string(r + 2) + ", column '" + col.name +
                            "': not a number: '" + *cell + "'");
        }
        values.push_back(v);
      }
      double mean = 0.0;
      try {
        mean = observed_mean(values);
      } catch (const std::invalid_argument&) {
        throw input_error("column '" + col.name + "': every value is missing");
      }
      fp.features.push_back({c, ColumnKind::continuous, mean, std::nullopt});
      fp.encoded_names.push_back(col.name);
    } else if (col.kind == ColumnKind::categorical) {
      std::vector<Cell> cells;
      cells.reserve(rows.size());
      for (auto r : rows) cells.push_back(t.rows[r][c]);
      try {
        auto enc = encode_categorical(cells);
        for (const auto& o : enc.indicators) fp.encoded_names.push_back(col.name + "=" + o.value_or("<missing>"));
        fp.features.push_back({c, ColumnKind::categorical, 0.0, std::move(enc)});
      } catch (const std::invalid_argument&) {
        fp.warnings.push_back("categorical column '" + col.name + "' has a single outcome; dropped");
      }
    }
  }
  if (fp.encoded_names.empty()) throw input_error("no usable feature columns");
  auto [std_x, stats] = standardize(fp.encode(t, rows));
  for (auto k : stats.dropped)
    fp.warnings.push_back("column '" + fp.encoded_names[k] + "' has zero variance; dropped");
  fp.standardization = std::move(stats);
  auto [values, vectors] = covariance_eigen(std_x);
  fp.eigenvalues = values;
  const std::size_t rank = numeric_rank(values);
  if (rank < 2) throw input_error("data has fewer than two informative directions");
  if (opts.dimension) {
    if (*opts.dimension < 1 || *opts.dimension > rank) {
      throw input_error("requested dimension " + std::to_string(*opts.dimension) +
                        " exceeds the data rank " + std::to_string(rank));
    }
    fp.dimension = *opts.dimension;
  } else {
    fp.dimension = std::min(select_dimension(values), rank);
    fp.dimension_selected = true;
  }
  fp.basis = Matrix(std_x.cols(), fp.dimension);
  for (std::size_t i = 0; i < std_x.cols(); ++i)
    for (std::size_t k = 0; k < fp.dimension; ++k)
      fp.basis(i, k) = vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  return fp;
}

/// Preprocessed dataset: projected features, binary labels, provenance.
struct Dataset {
  std::string name;
  Matrix x;
  std::vector<Label> y;
  nlohmann::json provenance;
};

inline std::vector<Label> binary_labels(const RawTable& t, const ClassGrouping& g) {
  std::vector<Label> y;
  for (const auto& v : t.label_values()) y.push_back(g.map(v));
  return y;
}

inline nlohmann::json grouping_json(const ClassGrouping& g) {
  return {{"+1", g.positive}, {"-1", g.negative}, {"imbalance", g.imbalance}};
}

/// Whole-table preprocessing: grouping and pipeline fitted on every row.
inline Dataset preprocess(const RawTable& t, const DatasetMeta& meta) {
  const auto labels = t.label_values();
  const ClassGrouping g = binarize_classes(labels, meta.grouping);
  std::vector<std::size_t> all(t.rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const FittedPipeline fp = fit_pipeline(t, all, {meta.dimension});
  Dataset ds;
  ds.name = t.name;
  ds.x = fp.transform(t, all);
  ds.y = binary_labels(t, g);
  ds.provenance = fp.to_json();
  ds.provenance["name"] = t.name;
  ds.provenance["rows"] = t.rows.size();
  ds.provenance["class_grouping"] = grouping_json(g);
  return ds;
}

inline void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  for (std::size_t k = 0; k < ds.x.cols(); ++k) out << "pc" << (k + 1) << ',';
  out << "label\n";
  for (std::size_t r = 0; r < ds.x.rows(); ++r) {
    for (std::size_t k = 0; k < ds.x.cols(); ++k) out << format_double(ds.x(r, k)) << ',';
    out << to_int(ds.y[r]) << '\n';
  }
}

/// Sidecar describing a dataset CSV written by write_dataset_csv, so it can be
/// fed back through the pipeline (e.g. refitted per CV fold).
inline DatasetMeta dataset_csv_meta(const std::string& name) {
  DatasetMeta m;
  m.name = name;
  m.label_column = "label";
  m.kinds["label"] = ColumnKind::label;
  m.grouping = GroupingSpec{{"1"}, std::vector<std::string>{"-1"}};
  return m;
}

}  // namespace deal
