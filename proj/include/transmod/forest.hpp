#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "transmod/predict.hpp"
#include "transmod/tree.hpp"

namespace transmod {

// Forest trees default to size-based stopping only (no permutation gate).
inline TreeControl forest_tree_defaults() {
  TreeControl t;
  t.alpha = 1.0;
  t.min_split = 40.0;
  t.min_leaf = 20.0;
  return t;
}

struct ForestControl {
  Index n_trees = 100;
  double fraction = 0.632;  // subsample share, drawn without replacement
  Index mtry = 0;           // candidate variables per node; 0 = ceil(sqrt(V))
  std::uint64_t seed = 1;
  TreeControl tree = forest_tree_defaults();

  void validate() const;
};

struct TransformationForest {
  ModelSpec spec;
  ForestControl ctrl;
  std::vector<Tree> trees;
  std::vector<std::vector<Index>> subsamples;  // ascending row ids per tree
  Index n_train = 0;
};

TransformationForest fit_forest(const Dataset& d, const ModelSpec& base,
                                const ForestControl& ctrl);

// Nearest-neighbour weight of every training row for the covariate profile:
// sum over trees of [row in the tree's subsample and in the leaf the profile
// routes to] / (weighted leaf size). The sampling-weighted per-tree totals
// are 1 for every contributing tree.
Vector nn_weights(const TransformationForest& f, const Profile& x);

struct ForestParams {
  Vector theta;
  double loglik = 0.0;  // weighted log-likelihood of the local fit
  bool fallback = false;  // too few positive weights: unconditional fit used
  Vector nn;  // the nearest-neighbour weights behind the fit
};

// Locally adaptive MLE: refits the base model with nearest-neighbour times
// sampling weights.
ForestParams forest_params(const TransformationForest& f, const Dataset& d,
                           const Profile& x);

// Training-data log-likelihood sum_i w_i log f(y_i | theta_hat(x_i)); rows
// sharing every leaf share their local fit.
double forest_loglik(const TransformationForest& f, const Dataset& d);

struct ImportanceResult {
  std::vector<std::string> vars;
  Vector importance;  // mean per-tree in-sample loglik decrease
};

// Permutation importance: permutes one covariate within each tree's
// subsample (K rounds, fixed seeds), re-routes rows to leaves with the leaf
// models held fixed, and averages the log-likelihood decrease. Variables a
// tree never splits on contribute exactly 0 for that tree. out_of_bag
// evaluates on the rows outside each tree's subsample instead.
ImportanceResult var_importance(const TransformationForest& f, const Dataset& d,
                                Index k_perms = 5, bool out_of_bag = false);

struct PdpOptions {
  Index max_rows = 200;       // training rows averaged over (seeded subsample)
  Index numeric_points = 5;   // grid points per numeric variable
  std::vector<double> probs;  // defaults to the nine deciles
};

// Partial dependence: for every combination of the named variables'
// grid values, average forest_params over a fixed subsample of training
// rows with those variables overridden, and tabulate the deciles of the
// averaged parameter vector. The last numeric variable becomes the grid
// column; other variables label the profile.
CurveTable partial_dependence(const TransformationForest& f, const Dataset& d,
                              const std::vector<std::string>& vars,
                              const PdpOptions& opt = {});

}  // namespace transmod
