#include "transmod/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "transmod/errors.hpp"
#include "transmod/text.hpp"

namespace transmod {

namespace {

bool is_missing_token(std::string_view s) { return s.empty() || s == "NA"; }

std::string row_col(const std::string& col, Index file_line) {
  return "column '" + col + "', line " + std::to_string(file_line);
}

}  // namespace

bool Column::is_missing(Index i) const {
  return type == ColumnType::Numeric ? std::isnan(numeric[i])
                                     : codes[static_cast<std::size_t>(i)] < 0;
}

int Column::level_code(const std::string& level) const {
  auto it = std::find(levels.begin(), levels.end(), level);
  return it == levels.end() ? -1 : static_cast<int>(it - levels.begin());
}

Dataset::Dataset(std::string response_name, Vector response, std::vector<Column> covariates,
                 Vector weights, std::string weight_name)
    : response_name_(std::move(response_name)), weight_name_(std::move(weight_name)),
      response_(std::move(response)), weights_(std::move(weights)),
      covariates_(std::move(covariates)) {
  const Index n = response_.size();
  if (weights_.size() == 0) weights_ = Vector::Ones(n);
  if (weights_.size() != n) throw DataError("weights length differs from response length");
  for (Index i = 0; i < n; ++i) {
    if (std::isnan(weights_[i])) continue;  // dropped later like other missing values
    if (weights_[i] < 0.0)
      throw DataError("negative weight at row " + std::to_string(i + 1));
  }
  for (std::size_t c = 0; c < covariates_.size(); ++c) {
    const Column& col = covariates_[c];
    if (col.size() != n)
      throw DataError("column '" + col.name + "' length differs from response length");
    if (!index_.emplace(col.name, c).second)
      throw DataError("duplicate column name '" + col.name + "'");
  }
}

bool Dataset::has_column(const std::string& name) const { return index_.count(name) > 0; }

const Column& Dataset::column(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw DataError("unknown column '" + name + "'");
  return covariates_[it->second];
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  const Index m = static_cast<Index>(rows.size());
  Vector y(m), w(m);
  for (Index i = 0; i < m; ++i) {
    y[i] = response_[rows[static_cast<std::size_t>(i)]];
    w[i] = weights_[rows[static_cast<std::size_t>(i)]];
  }
  std::vector<Column> cols;
  cols.reserve(covariates_.size());
  for (const Column& col : covariates_) {
    Column out;
    out.name = col.name;
    out.type = col.type;
    out.levels = col.levels;
    if (col.type == ColumnType::Numeric) {
      out.numeric.resize(m);
      for (Index i = 0; i < m; ++i)
        out.numeric[i] = col.numeric[rows[static_cast<std::size_t>(i)]];
    } else {
      out.codes.resize(static_cast<std::size_t>(m));
      for (Index i = 0; i < m; ++i)
        out.codes[static_cast<std::size_t>(i)] =
            col.codes[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
    }
    cols.push_back(std::move(out));
  }
  return Dataset(response_name_, std::move(y), std::move(cols), std::move(w), weight_name_);
}

Dataset Dataset::with_weights(Vector weights) const {
  if (weights.size() != n()) throw DataError("replacement weights length mismatch");
  return Dataset(response_name_, response_, covariates_, std::move(weights), weight_name_);
}

namespace {

// Minimal RFC-style CSV reader: comma delimiter, optional double-quoted
// fields with "" escapes, \r\n tolerated. Leading '#' lines are skipped so
// files may carry a manifest comment before the header.
std::vector<std::vector<std::string>> read_csv_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t start = 0;
  while (start < text.size() && text[start] == '#') {
    const std::size_t eol = text.find('\n', start);
    if (eol == std::string::npos) {
      start = text.size();
      break;
    }
    start = eol + 1;
  }
  if (start > 0) text.erase(0, start);

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          record.push_back(std::move(field));
          field.clear();
          records.push_back(std::move(record));
          record.clear();
          any = false;
        }
        break;
      default:
        field += ch;
        any = true;
        break;
    }
  }
  if (quoted) throw DataError("unterminated quoted field in '" + path + "'");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) throw DataError("'" + path + "' is empty");
  return records;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response,
                 const std::string& weight, const Schema& schema) {
  auto records = read_csv_records(path);
  const std::vector<std::string>& header = records[0];
  const std::size_t ncol = header.size();
  const Index n = static_cast<Index>(records.size()) - 1;
  if (n < 1) throw DataError("'" + path + "' has a header but no data rows");

  auto col_of = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError("unknown column '" + name + "' in '" + path + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t response_col = col_of(response);
  const std::size_t weight_col = weight.empty() ? ncol : col_of(weight);

  for (Index r = 0; r < n; ++r) {
    if (records[static_cast<std::size_t>(r) + 1].size() != ncol)
      throw DataError("line " + std::to_string(r + 2) + " has " +
                      std::to_string(records[static_cast<std::size_t>(r) + 1].size()) +
                      " fields, header has " + std::to_string(ncol));
  }

  Vector y(n);
  for (Index r = 0; r < n; ++r) {
    const std::string& cell = records[static_cast<std::size_t>(r) + 1][response_col];
    if (is_missing_token(cell)) {
      y[r] = std::numeric_limits<double>::quiet_NaN();
    } else if (!parse_double(cell, y[r])) {
      throw DataError("non-numeric response entry '" + cell + "' at " +
                      row_col(response, r + 2));
    }
  }

  Vector w;
  if (weight_col < ncol) {
    w.resize(n);
    for (Index r = 0; r < n; ++r) {
      const std::string& cell = records[static_cast<std::size_t>(r) + 1][weight_col];
      if (is_missing_token(cell)) {
        w[r] = std::numeric_limits<double>::quiet_NaN();
      } else if (!parse_double(cell, w[r])) {
        throw DataError("non-numeric weight entry '" + cell + "' at " + row_col(weight, r + 2));
      } else if (w[r] < 0.0) {
        throw DataError("negative weight at " + row_col(weight, r + 2));
      }
    }
  }

  std::vector<Column> cols;
  for (std::size_t c = 0; c < ncol; ++c) {
    if (c == response_col || c == weight_col) continue;
    Column col;
    col.name = header[c];

    const ColumnHint* hint = nullptr;
    if (auto it = schema.find(col.name); it != schema.end()) hint = &it->second;

    bool numeric;
    if (hint) {
      numeric = hint->type == ColumnType::Numeric;
    } else {
      numeric = true;
      double tmp;
      for (Index r = 0; r < n && numeric; ++r) {
        const std::string& cell = records[static_cast<std::size_t>(r) + 1][c];
        if (!is_missing_token(cell) && !parse_double(cell, tmp)) numeric = false;
      }
    }

    if (numeric) {
      col.type = ColumnType::Numeric;
      col.numeric.resize(n);
      for (Index r = 0; r < n; ++r) {
        const std::string& cell = records[static_cast<std::size_t>(r) + 1][c];
        if (is_missing_token(cell)) {
          col.numeric[r] = std::numeric_limits<double>::quiet_NaN();
        } else if (!parse_double(cell, col.numeric[r])) {
          throw DataError("non-numeric entry '" + cell + "' at " + row_col(col.name, r + 2));
        }
      }
    } else {
      col.type = ColumnType::Categorical;
      if (hint && !hint->levels.empty()) col.levels = hint->levels;
      const bool pinned = !col.levels.empty();
      col.codes.resize(static_cast<std::size_t>(n));
      for (Index r = 0; r < n; ++r) {
        const std::string& cell = records[static_cast<std::size_t>(r) + 1][c];
        if (is_missing_token(cell)) {
          col.codes[static_cast<std::size_t>(r)] = -1;
          continue;
        }
        int code = col.level_code(cell);
        if (code < 0) {
          if (pinned)
            throw DataError("value '" + cell + "' not in the declared levels at " +
                            row_col(col.name, r + 2));
          code = static_cast<int>(col.levels.size());
          col.levels.push_back(cell);
        }
        col.codes[static_cast<std::size_t>(r)] = code;
      }
    }
    cols.push_back(std::move(col));
  }

  return Dataset(response, std::move(y), std::move(cols), std::move(w), weight);
}

void write_csv(const Dataset& d, const std::string& path, const std::string& comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  if (!comment.empty()) out << comment << "\n";

  std::vector<std::string> header;
  for (const Column& c : d.covariates()) header.push_back(csv_escape(c.name));
  header.push_back(d.weight_name().empty() ? "weights" : csv_escape(d.weight_name()));
  header.push_back(csv_escape(d.response_name()));
  out << join(header, ",") << "\n";

  for (Index i = 0; i < d.n(); ++i) {
    std::vector<std::string> row;
    row.reserve(header.size());
    for (const Column& c : d.covariates()) {
      if (c.type == ColumnType::Numeric) {
        row.push_back(format_double(c.numeric[i]));
      } else {
        const int code = c.codes[static_cast<std::size_t>(i)];
        row.push_back(code < 0 ? "NA" : csv_escape(c.levels[static_cast<std::size_t>(code)]));
      }
    }
    row.push_back(format_double(d.weights()[i]));
    row.push_back(format_double(d.response()[i]));
    out << join(row, ",") << "\n";
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::pair<Dataset, Index> drop_missing(const Dataset& d, const std::vector<std::string>& vars) {
  std::vector<const Column*> cols;
  cols.reserve(vars.size());
  for (const std::string& v : vars) cols.push_back(&d.column(v));

  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(d.n()));
  for (Index i = 0; i < d.n(); ++i) {
    bool ok = !std::isnan(d.response()[i]) && !std::isnan(d.weights()[i]);
    for (const Column* c : cols)
      if (ok && c->is_missing(i)) ok = false;
    if (ok) keep.push_back(i);
  }
  const Index dropped = d.n() - static_cast<Index>(keep.size());
  if (keep.empty()) throw DataError("all rows have missing values in the model variables");
  return {d.subset(keep), dropped};
}

Dataset trim_by_quantile(const Dataset& d, double lo, double hi) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi))
    throw ArgumentError("trim quantiles must satisfy 0 <= lo < hi <= 1");
  const double qlo = weighted_quantile(d.response(), d.weights(), lo);
  const double qhi = weighted_quantile(d.response(), d.weights(), hi);
  std::vector<Index> keep;
  for (Index i = 0; i < d.n(); ++i)
    if (d.response()[i] >= qlo && d.response()[i] <= qhi) keep.push_back(i);
  return d.subset(keep);
}

StratumIndex stratify(const Dataset& d, const std::vector<std::string>& vars) {
  StratumIndex s;
  s.vars = vars;
  s.cell.assign(static_cast<std::size_t>(d.n()), 0);
  if (vars.empty()) {
    s.cells = 1;
    s.labels = {""};
    return s;
  }

  std::vector<const Column*> cols;
  for (const std::string& v : vars) {
    const Column& c = d.column(v);
    if (c.type != ColumnType::Categorical)
      throw DataError("strata variable '" + v + "' is numeric; strata need categorical columns");
    cols.push_back(&c);
    s.var_levels.push_back(c.levels);
  }

  Index raw_cells = 1;
  for (const Column* c : cols) raw_cells *= static_cast<Index>(c->levels.size());

  std::vector<Index> raw(static_cast<std::size_t>(d.n()));
  std::vector<char> occupied(static_cast<std::size_t>(raw_cells), 0);
  for (Index i = 0; i < d.n(); ++i) {
    Index r = 0;
    for (const Column* c : cols) {
      const int code = c->codes[static_cast<std::size_t>(i)];
      if (code < 0)
        throw DataError("missing value in strata variable '" + c->name + "' at row " +
                        std::to_string(i + 1));
      r = r * static_cast<Index>(c->levels.size()) + code;
    }
    raw[static_cast<std::size_t>(i)] = r;
    occupied[static_cast<std::size_t>(r)] = 1;
  }

  s.dense_of_raw.assign(static_cast<std::size_t>(raw_cells), -1);
  for (Index r = 0; r < raw_cells; ++r) {
    if (!occupied[static_cast<std::size_t>(r)]) continue;
    s.dense_of_raw[static_cast<std::size_t>(r)] = s.labels.size();
    Index rest = r;
    std::vector<std::string> parts(vars.size());
    for (std::size_t v = vars.size(); v-- > 0;) {
      const auto L = static_cast<Index>(cols[v]->levels.size());
      parts[v] = vars[v] + "=" + cols[v]->levels[static_cast<std::size_t>(rest % L)];
      rest /= L;
    }
    s.labels.push_back(join(parts, ":"));
  }
  s.cells = static_cast<Index>(s.labels.size());
  for (Index i = 0; i < d.n(); ++i)
    s.cell[static_cast<std::size_t>(i)] =
        s.dense_of_raw[static_cast<std::size_t>(raw[static_cast<std::size_t>(i)])];
  return s;
}

Index StratumIndex::cell_for_levels(const std::vector<std::string>& level_values) const {
  if (trivial()) return 0;
  if (level_values.size() != vars.size())
    throw ArgumentError("expected " + std::to_string(vars.size()) + " stratum levels");
  Index raw = 0;
  std::vector<std::string> parts;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const auto& levels = var_levels[v];
    auto it = std::find(levels.begin(), levels.end(), level_values[v]);
    if (it == levels.end())
      throw RoutingError("unknown level '" + level_values[v] + "' for variable '" + vars[v] + "'");
    raw = raw * static_cast<Index>(levels.size()) + static_cast<Index>(it - levels.begin());
    parts.push_back(vars[v] + "=" + level_values[v]);
  }
  const Index dense = dense_of_raw[static_cast<std::size_t>(raw)];
  if (dense < 0)
    throw SpecificationError("stratum cell '" + join(parts, ":") +
                             "' has no parameters (unoccupied in the training data)");
  return dense;
}

namespace {

void require_no_missing(const Column& c, const std::string& context) {
  for (Index i = 0; i < c.size(); ++i)
    if (c.is_missing(i))
      throw DataError("missing value in '" + c.name + "' used by " + context +
                      " at row " + std::to_string(i + 1));
}

void add_main_columns(const Dataset& d, const std::string& v, ShiftDesign& out) {
  const Column& c = d.column(v);
  require_no_missing(c, "a shift term");
  if (c.type == ColumnType::Numeric) {
    out.cols.push_back({v, {}, {v}});
  } else {
    out.cat_levels[v] = c.levels;
    for (std::size_t l = 1; l < c.levels.size(); ++l)
      out.cols.push_back({v + "=" + c.levels[l], {{v, static_cast<int>(l)}}, {}});
  }
}

void add_interaction_columns(const Dataset& d, const std::string& v1, const std::string& v2,
                             ShiftDesign& out) {
  const Column& c1 = d.column(v1);
  const Column& c2 = d.column(v2);
  require_no_missing(c1, "a shift term");
  require_no_missing(c2, "a shift term");
  const bool cat1 = c1.type == ColumnType::Categorical;
  const bool cat2 = c2.type == ColumnType::Categorical;
  if (cat1) out.cat_levels[v1] = c1.levels;
  if (cat2) out.cat_levels[v2] = c2.levels;

  if (cat1 && cat2) {
    // One column per non-reference level of v2 within every level of v1:
    // within-v1 contrasts of v2, so effects of v2 are v1-specific.
    for (std::size_t l1 = 0; l1 < c1.levels.size(); ++l1)
      for (std::size_t l2 = 1; l2 < c2.levels.size(); ++l2)
        out.cols.push_back({v1 + "=" + c1.levels[l1] + ":" + v2 + "=" + c2.levels[l2],
                            {{v1, static_cast<int>(l1)}, {v2, static_cast<int>(l2)}},
                            {}});
  } else if (cat1 && !cat2) {
    for (std::size_t l1 = 0; l1 < c1.levels.size(); ++l1)
      out.cols.push_back(
          {v1 + "=" + c1.levels[l1] + ":" + v2, {{v1, static_cast<int>(l1)}}, {v2}});
  } else if (!cat1 && cat2) {
    for (std::size_t l2 = 0; l2 < c2.levels.size(); ++l2)
      out.cols.push_back(
          {v1 + ":" + v2 + "=" + c2.levels[l2], {{v2, static_cast<int>(l2)}}, {v1}});
  } else {
    out.cols.push_back({v1 + ":" + v2, {}, {v1, v2}});
  }
}

void add_cross_interaction_columns(const Dataset& d, const std::string& v1,
                                   const std::string& v2, ShiftDesign& out) {
  const Column& c1 = d.column(v1);
  const Column& c2 = d.column(v2);
  const bool cat1 = c1.type == ColumnType::Categorical;
  const bool cat2 = c2.type == ColumnType::Categorical;
  if (cat1 && cat2) {
    // Non-reference cells only; main effects carry the rest.
    for (std::size_t l1 = 1; l1 < c1.levels.size(); ++l1)
      for (std::size_t l2 = 1; l2 < c2.levels.size(); ++l2)
        out.cols.push_back({v1 + "=" + c1.levels[l1] + ":" + v2 + "=" + c2.levels[l2],
                            {{v1, static_cast<int>(l1)}, {v2, static_cast<int>(l2)}},
                            {}});
  } else if (cat1 && !cat2) {
    for (std::size_t l1 = 1; l1 < c1.levels.size(); ++l1)
      out.cols.push_back(
          {v1 + "=" + c1.levels[l1] + ":" + v2, {{v1, static_cast<int>(l1)}}, {v2}});
  } else if (!cat1 && cat2) {
    for (std::size_t l2 = 1; l2 < c2.levels.size(); ++l2)
      out.cols.push_back(
          {v1 + ":" + v2 + "=" + c2.levels[l2], {{v2, static_cast<int>(l2)}}, {v1}});
  } else {
    out.cols.push_back({v1 + ":" + v2, {}, {v1, v2}});
  }
}

}  // namespace

ShiftDesign shift_design(const Dataset& d, const std::vector<ShiftTerm>& terms) {
  ShiftDesign out;
  for (const ShiftTerm& t : terms) {
    switch (t.kind) {
      case ShiftTerm::Kind::Main:
        add_main_columns(d, t.v1, out);
        break;
      case ShiftTerm::Kind::Interaction:
        add_interaction_columns(d, t.v1, t.v2, out);
        break;
      case ShiftTerm::Kind::Cross:
        add_main_columns(d, t.v1, out);
        add_main_columns(d, t.v2, out);
        add_cross_interaction_columns(d, t.v1, t.v2, out);
        break;
    }
  }

  out.X.resize(d.n(), out.dim());
  for (Index j = 0; j < out.dim(); ++j) {
    const auto& spec = out.cols[static_cast<std::size_t>(j)];
    for (Index i = 0; i < d.n(); ++i) {
      double v = 1.0;
      for (const auto& [var, code] : spec.cat_eq)
        if (d.column(var).codes[static_cast<std::size_t>(i)] != code) v = 0.0;
      if (v != 0.0)
        for (const std::string& var : spec.numeric_vars) v *= d.column(var).numeric[i];
      out.X(i, j) = v;
    }
  }
  return out;
}

double profile_numeric(const Profile& p, const std::string& var) {
  double v;
  if (!parse_double(profile_value(p, var), v))
    throw ArgumentError("profile value for '" + var + "' is not a number");
  return v;
}

const std::string& profile_value(const Profile& p, const std::string& var) {
  auto it = p.find(var);
  if (it == p.end()) throw ArgumentError("profile is missing covariate '" + var + "'");
  return it->second;
}

RowVector encode_profile(const ShiftDesign& design, const Profile& p) {
  RowVector row(design.dim());
  for (Index j = 0; j < design.dim(); ++j) {
    const auto& spec = design.cols[static_cast<std::size_t>(j)];
    double v = 1.0;
    for (const auto& [var, code] : spec.cat_eq) {
      const auto& levels = design.cat_levels.at(var);
      const std::string& value = profile_value(p, var);
      auto it = std::find(levels.begin(), levels.end(), value);
      if (it == levels.end())
        throw RoutingError("unknown level '" + value + "' for variable '" + var + "'");
      if (static_cast<int>(it - levels.begin()) != code) v = 0.0;
    }
    if (v != 0.0)
      for (const std::string& var : spec.numeric_vars) v *= profile_numeric(p, var);
    row[j] = v;
  }
  return row;
}

Index cell_for_profile(const StratumIndex& strata, const Profile& p) {
  if (strata.trivial()) return 0;
  std::vector<std::string> values;
  values.reserve(strata.vars.size());
  for (const std::string& v : strata.vars) values.push_back(profile_value(p, v));
  return strata.cell_for_levels(values);
}

Profile profile_from_row(const Dataset& d, Index i) {
  Profile p;
  for (const Column& c : d.covariates()) {
    if (c.is_missing(i)) continue;
    if (c.type == ColumnType::Numeric)
      p[c.name] = format_double(c.numeric[i]);
    else
      p[c.name] = c.levels[static_cast<std::size_t>(c.codes[static_cast<std::size_t>(i)])];
  }
  return p;
}

WeightedEcdf weighted_ecdf(const Vector& y, const Vector& w) {
  if (y.size() == 0) throw ArgumentError("empty sample for an empirical CDF");
  const double total = w.sum();
  if (!(total > 0.0)) throw ArgumentError("empirical CDF needs positive total weight");

  std::vector<Index> order(static_cast<std::size_t>(y.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return y[a] < y[b]; });

  std::vector<double> vals, cum;
  double running = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double v = y[order[k]];
    running += w[order[k]];
    if (!vals.empty() && vals.back() == v)
      cum.back() = running;
    else {
      vals.push_back(v);
      cum.push_back(running);
    }
  }

  WeightedEcdf e;
  e.values = Eigen::Map<Vector>(vals.data(), static_cast<Index>(vals.size()));
  e.cdf = Eigen::Map<Vector>(cum.data(), static_cast<Index>(cum.size())) / total;
  return e;
}

double WeightedEcdf::operator()(double y) const {
  // Last index with values[j] <= y.
  Index lo = 0, hi = values.size();
  while (lo < hi) {
    const Index mid = (lo + hi) / 2;
    if (values[mid] <= y)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo == 0 ? 0.0 : cdf[lo - 1];
}

double weighted_quantile(const Vector& y, const Vector& w, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile level must lie in [0,1]");
  WeightedEcdf e = weighted_ecdf(y, w);
  const double target = p;
  for (Index j = 0; j < e.values.size(); ++j)
    if (e.cdf[j] >= target - 1e-12) return e.values[j];
  return e.values[e.values.size() - 1];
}

}  // namespace transmod
