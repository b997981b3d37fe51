#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "transmod/fit.hpp"
#include "transmod/model.hpp"

namespace transmod {

struct TreeControl {
  double alpha = 0.05;      // alpha >= 1 disables the permutation gate
  double min_split = 200.0;  // weighted node size needed to test a split
  double min_leaf = 70.0;    // weighted size required on both sides
  int max_depth = -1;        // negative: unbounded
  Index n_perm = 9999;
  std::uint64_t seed = 1;
  Index mtry = 0;  // candidates drawn per node; 0 = all variables
  FitOptions fit;

  void validate() const;
};

// A node of a fitted transformation tree. Interior nodes carry the split
// descriptor; leaves carry the refitted unconditional model and the
// training rows (ids into the dataset the tree was fitted on).
struct TreeNode {
  Index id = 1;  // root 1, children 2*id and 2*id+1
  Index n_rows = 0;
  double weighted_n = 0.0;
  // Bonferroni-adjusted p-value of the selected variable; NaN when the
  // permutation gate was skipped (alpha >= 1) or no candidate was testable.
  double p_value = std::numeric_limits<double>::quiet_NaN();
  std::string selected_var;

  std::string split_var;  // empty for leaves
  bool split_is_numeric = true;
  double cutpoint = 0.0;  // numeric splits: x <= cutpoint routes left
  std::vector<std::string> left_levels;   // categorical splits
  std::vector<std::string> right_levels;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;

  bool forced_leaf = false;  // leaf because the node fit was not possible
  std::optional<FittedModel> model;  // leaves only
  std::vector<Index> rows;           // leaves only

  bool is_leaf() const { return left == nullptr; }
};

struct Tree {
  ModelSpec spec;
  TreeControl ctrl;
  std::unique_ptr<TreeNode> root;
  std::vector<Index> rows;  // training rows in canonical order

  Index n_leaves() const;
  Index depth() const;
};

// Fits a transformation tree: each node refits the unconditional model,
// tests independence between its score contributions and the candidate
// covariates by permutation, and splits at the strongest cutpoint. The
// base spec must be unconditional (no strata, shifts, or basis covariates).
Tree fit_tree(const Dataset& d, const ModelSpec& base, const TreeControl& ctrl);

// Internal entry point shared with the forest: fits on the given rows of d
// with per-node candidate subsampling. rows must be sorted ascending.
Tree fit_tree_rows(const Dataset& d, const ModelSpec& base,
                   const TreeControl& ctrl, const std::vector<Index>& rows,
                   std::uint64_t tree_index);

// Leaf containing the covariate profile; throws RoutingError on levels
// unseen in training.
const TreeNode& route_profile(const Tree& t, const Profile& x);
const TreeNode& route_row(const Tree& t, const Dataset& d, Index i);

const FittedModel& predict_tree(const Tree& t, const Profile& x);

// Sum of leaf-model log-likelihoods over the rows of d, each row evaluated
// under the leaf it routes to.
double tree_loglik(const Tree& t, const Dataset& d);

}  // namespace transmod
