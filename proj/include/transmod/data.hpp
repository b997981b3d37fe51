#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "transmod/types.hpp"

namespace transmod {

enum class ColumnType { Numeric, Categorical };

// A single covariate column. Numeric columns store values (NaN = missing);
// categorical columns store level codes (-1 = missing) plus the level list
// in declared order, whose first entry is the reference level.
struct Column {
  std::string name;
  ColumnType type = ColumnType::Numeric;
  Vector numeric;
  std::vector<int> codes;
  std::vector<std::string> levels;

  Index size() const {
    return type == ColumnType::Numeric ? numeric.size()
                                       : static_cast<Index>(codes.size());
  }
  bool is_missing(Index i) const;
  int level_code(const std::string& level) const;  // -1 when unknown
};

struct ColumnHint {
  ColumnType type = ColumnType::Categorical;
  std::vector<std::string> levels;  // optional pinned level order
};
using Schema = std::map<std::string, ColumnHint>;

// Immutable columnar dataset: numeric response, named covariates in file
// order, non-negative sampling weights (1 when absent).
class Dataset {
 public:
  Dataset(std::string response_name, Vector response, std::vector<Column> covariates,
          Vector weights, std::string weight_name = "");

  Index n() const { return response_.size(); }
  const std::string& response_name() const { return response_name_; }
  const std::string& weight_name() const { return weight_name_; }
  const Vector& response() const { return response_; }
  const Vector& weights() const { return weights_; }
  double weight_total() const { return weights_.sum(); }

  const std::vector<Column>& covariates() const { return covariates_; }
  bool has_column(const std::string& name) const;
  const Column& column(const std::string& name) const;  // throws DataError

  Dataset subset(const std::vector<Index>& rows) const;
  Dataset with_weights(Vector weights) const;

 private:
  std::string response_name_;
  std::string weight_name_;
  Vector response_;
  Vector weights_;
  std::vector<Column> covariates_;
  std::map<std::string, std::size_t> index_;
};

Dataset load_csv(const std::string& path, const std::string& response,
                 const std::string& weight = "", const Schema& schema = {});
void write_csv(const Dataset& d, const std::string& path, const std::string& comment = "");

// Removes rows with a missing value in the response, the weights, or any of
// the listed covariates. Returns the filtered dataset and the dropped count.
std::pair<Dataset, Index> drop_missing(const Dataset& d, const std::vector<std::string>& vars);

// Rows whose response lies inside the [lo, hi] weighted-quantile range.
Dataset trim_by_quantile(const Dataset& d, double lo, double hi);

// Cross-classification of categorical covariates into dense cell ids,
// ordered lexicographically in declared level order; only occupied cells
// get ids. With no variables there is a single cell.
struct StratumIndex {
  std::vector<std::string> vars;
  std::vector<std::vector<std::string>> var_levels;
  std::vector<Index> dense_of_raw;   // raw cross index -> dense id, -1 unoccupied
  std::vector<std::string> labels;   // per dense cell, "sex=male:smoking=former"
  Index cells = 1;
  std::vector<Index> cell;           // per-row dense id for the source dataset

  bool trivial() const { return vars.empty(); }
  // Dense cell for explicit level names; throws RoutingError on unseen
  // levels and SpecificationError on unoccupied cells.
  Index cell_for_levels(const std::vector<std::string>& level_values) const;
};

StratumIndex stratify(const Dataset& d, const std::vector<std::string>& vars);

// A shift term from the formula: v, v1:v2 (interaction cells) or v1*v2
// (main effects plus interaction).
struct ShiftTerm {
  enum class Kind { Main, Interaction, Cross };
  Kind kind = Kind::Main;
  std::string v1;
  std::string v2;
};

// Shift design matrix plus the recipe for encoding new covariate profiles.
// Every column is a product of categorical indicators and numeric values,
// so reference rows encode as zeros.
struct ShiftDesign {
  struct ColumnSpec {
    std::string label;
    std::vector<std::pair<std::string, int>> cat_eq;  // (variable, level code)
    std::vector<std::string> numeric_vars;
  };

  std::vector<ColumnSpec> cols;
  std::map<std::string, std::vector<std::string>> cat_levels;
  Matrix X;  // n x dim() for the source dataset

  Index dim() const { return static_cast<Index>(cols.size()); }
};

ShiftDesign shift_design(const Dataset& d, const std::vector<ShiftTerm>& terms);

// Covariate profile for prediction: values as text, converted per column
// type (level name or decimal number).
using Profile = std::map<std::string, std::string>;

double profile_numeric(const Profile& p, const std::string& var);
const std::string& profile_value(const Profile& p, const std::string& var);

RowVector encode_profile(const ShiftDesign& design, const Profile& p);
Index cell_for_profile(const StratumIndex& strata, const Profile& p);
Profile profile_from_row(const Dataset& d, Index i);

// Weighted right-continuous empirical CDF: jump of w/sum(w) at each sorted
// distinct value, ties merged.
struct WeightedEcdf {
  Vector values;  // sorted distinct
  Vector cdf;     // right-continuous at values
  double operator()(double y) const;
  // CDF just below values[j] (the previous step height).
  double before(Index j) const { return j == 0 ? 0.0 : cdf[j - 1]; }
};

WeightedEcdf weighted_ecdf(const Vector& y, const Vector& w);

// Weighted quantile of type "lower value whose cumulative weight reaches
// p * total"; used for cutpoint ranges and trimming.
double weighted_quantile(const Vector& y, const Vector& w, double p);

}  // namespace transmod
