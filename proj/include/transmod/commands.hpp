#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "transmod/types.hpp"

namespace transmod {

// Plain option structs for the CLI commands. The argv front end only fills
// these in; everything else lives here so commands are callable from tests.
// Commands throw ArgumentError on user mistakes (exit code 2) and
// NumericError on fit failures (exit code 3).

struct CommonOptions {
  std::string data;
  std::string formula;
  std::string weight_column;  // empty: all weights 1
  std::string out = ".";
  std::uint64_t seed = 1;
  int threads = 1;
};

struct FitCommand {
  CommonOptions common;
  double level = 0.95;
  std::vector<std::string> overlay;  // stratum variables for the ECDF overlay
};

struct TreeCommand {
  CommonOptions common;
  double alpha = 0.05;
  double min_split = 200.0;
  double min_leaf = 70.0;
  int max_depth = -1;
  Index n_perm = 9999;
  std::vector<std::string> pdp;  // partial-dependence variables
};

struct ForestCommand {
  CommonOptions common;
  Index n_trees = 100;
  double fraction = 0.632;
  Index mtry = 0;          // 0: ceil(sqrt(number of covariates))
  bool mtry_all = false;   // --mtry all
  std::vector<std::string> pdp;
};

struct SimulateCommand {
  std::string out = ".";
  Index n = 1000;
  std::uint64_t seed = 1;
  double effect_scale = 1.0;
  bool random_weights = false;
};

// Splits "prefix=a,b,c" option values; throws ArgumentError when the prefix
// is wrong or the list is empty.
std::vector<std::string> parse_var_list(const std::string& text, const std::string& prefix);

// fit: params.json, summary.txt, and curves.csv when an overlay is requested.
void cmd_fit(const FitCommand& cmd);

// tree: model.json and importance.csv, pdp.csv when requested. Importance
// and partial dependence come from the single-tree full-sample forest, whose
// tree is identical to the directly fitted one.
void cmd_tree(const TreeCommand& cmd);

// forest: model.json, importance.csv, pdp.csv when requested.
void cmd_forest(const ForestCommand& cmd);

// simulate: data.csv drawn from the synthetic health-survey generator.
void cmd_simulate(const SimulateCommand& cmd);

}  // namespace transmod
