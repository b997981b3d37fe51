#include "transmod/forest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "transmod/errors.hpp"
#include "transmod/rng.hpp"
#include "transmod/text.hpp"

namespace transmod {

namespace {

constexpr std::uint64_t kPurposeSubsample = 0x73756273ULL;
constexpr std::uint64_t kPurposeVarimp = 0x76696d70ULL;
constexpr std::uint64_t kPurposePdp = 0x70647030ULL;

// Leaf reached by each row in each tree; rows with equal signatures have
// identical nearest-neighbour weights, so local fits can be shared.
using LeafSignature = std::vector<Index>;

const TreeNode& route_leaf(const Tree& t, const Dataset& d, Index row) {
  return route_row(t, d, row);
}

Vector weights_for_leaves(const TransformationForest& f,
                          const std::vector<const TreeNode*>& leaves) {
  Vector nn = Vector::Zero(f.n_train);
  for (const TreeNode* leaf : leaves) {
    if (!leaf || leaf->weighted_n <= 0.0) continue;
    double share = 1.0 / leaf->weighted_n;
    for (Index row : leaf->rows) nn[row] += share;
  }
  return nn;
}

struct LocalFit {
  Vector theta;
  double loglik = 0.0;
  bool fallback = false;
};

// Shared machinery behind forest_params/forest_loglik: fit the base model
// with weights nn * w restricted to the rows that carry weight.
LocalFit local_fit(const TransformationForest& f, const Dataset& d,
                   const Vector& nn, const FittedModel* unconditional) {
  std::vector<Index> rows;
  for (Index i = 0; i < f.n_train; ++i) {
    if (nn[i] > 0.0 && d.weights()[i] > 0.0) rows.push_back(i);
  }
  LocalFit out;
  if (static_cast<Index>(rows.size()) >= f.spec.n_params()) {
    Dataset sub = d.subset(rows);
    Vector u(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      u[static_cast<Index>(k)] = nn[rows[k]] * d.weights()[rows[k]];
    }
    try {
      FittedModel fm = mle_weighted(f.spec, sub, u, f.ctrl.tree.fit);
      out.theta = fm.theta;
      out.loglik = fm.loglik;
      return out;
    } catch (const NumericError&) {
    } catch (const SpecificationError&) {
    }
  }
  out.fallback = true;
  if (unconditional) {
    out.theta = unconditional->theta;
    out.loglik = unconditional->loglik;
  } else {
    FittedModel fm = mle(f.spec, d, f.ctrl.tree.fit);
    out.theta = fm.theta;
    out.loglik = fm.loglik;
  }
  return out;
}

bool tree_uses_var(const TreeNode& n, const std::string& var) {
  if (n.is_leaf()) return false;
  if (n.split_var == var) return true;
  return tree_uses_var(*n.left, var) || tree_uses_var(*n.right, var);
}

// In-sample log-likelihood of one tree over the given rows, with each row
// evaluated under the leaf model it routes to. Routing reads covariates
// through `lookup` so a permuted column can be injected.
double tree_eval_loglik(
    const Tree& t, const Dataset& d, const std::vector<Index>& rows,
    const std::function<double(const std::string&, Index)>& num,
    const std::function<const std::string&(const std::string&, Index)>& cat) {
  std::map<Index, std::pair<const TreeNode*, std::vector<Index>>> groups;
  for (Index row : rows) {
    const TreeNode* cur = t.root.get();
    while (!cur->is_leaf()) {
      bool left;
      if (cur->split_is_numeric) {
        left = num(cur->split_var, row) <= cur->cutpoint;
      } else {
        const std::string& level = cat(cur->split_var, row);
        if (std::find(cur->left_levels.begin(), cur->left_levels.end(),
                      level) != cur->left_levels.end()) {
          left = true;
        } else if (std::find(cur->right_levels.begin(),
                             cur->right_levels.end(),
                             level) != cur->right_levels.end()) {
          left = false;
        } else {
          throw RoutingError("level '" + level + "' of '" + cur->split_var +
                             "' was not seen in training");
        }
      }
      cur = left ? cur->left.get() : cur->right.get();
    }
    auto& slot = groups[cur->id];
    slot.first = cur;
    slot.second.push_back(row);
  }
  double total = 0.0;
  for (const auto& [id, group] : groups) {
    (void)id;
    LikelihoodProblem prob(group.first->model->spec, d.subset(group.second));
    total += prob.loglik(group.first->model->theta);
  }
  return total;
}

std::vector<double> numeric_grid(const Dataset& d, const std::string& var,
                                 Index points) {
  const Column& col = d.column(var);
  double lo = weighted_quantile(col.numeric, d.weights(), 0.05);
  double hi = weighted_quantile(col.numeric, d.weights(), 0.95);
  std::vector<double> out;
  if (points == 1 || !(hi > lo)) {
    out.push_back(0.5 * (lo + hi));
    return out;
  }
  for (Index k = 0; k < points; ++k) {
    out.push_back(lo + (hi - lo) * static_cast<double>(k) /
                           static_cast<double>(points - 1));
  }
  return out;
}

}  // namespace

void ForestControl::validate() const {
  if (n_trees < 1) throw ArgumentError("forest needs at least one tree");
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw ArgumentError("subsample fraction must be in (0, 1]");
  }
  if (mtry < 0) throw ArgumentError("mtry must be >= 0");
  tree.validate();
}

TransformationForest fit_forest(const Dataset& d, const ModelSpec& base,
                                const ForestControl& ctrl) {
  ctrl.validate();
  Index n = d.n();
  Index n_vars = static_cast<Index>(d.covariates().size());
  if (n_vars == 0) throw SpecificationError("forest needs covariates");

  TransformationForest f;
  f.spec = base;
  f.ctrl = ctrl;
  f.n_train = n;

  Index mtry = ctrl.mtry;
  if (mtry == 0) {
    mtry = static_cast<Index>(
        std::ceil(std::sqrt(static_cast<double>(n_vars))));
  }
  mtry = std::min(mtry, n_vars);

  TreeControl tree_ctrl = ctrl.tree;
  tree_ctrl.seed = ctrl.seed;
  // mtry == V means no subsetting; skipping the draw keeps a full-mtry
  // forest tree identical to fit_tree.
  tree_ctrl.mtry = (mtry >= n_vars) ? 0 : mtry;

  Index m = static_cast<Index>(std::llround(ctrl.fraction * static_cast<double>(n)));
  m = std::clamp<Index>(m, 1, n);

  for (Index b = 0; b < ctrl.n_trees; ++b) {
    std::vector<Index> rows;
    if (m >= n) {
      rows.resize(static_cast<std::size_t>(n));
      std::iota(rows.begin(), rows.end(), 0);
    } else {
      Rng rng(mix_seed(ctrl.seed, static_cast<std::uint64_t>(b), 0,
                       kPurposeSubsample));
      std::vector<std::size_t> drawn = rng.sample_without_replacement(
          static_cast<std::size_t>(n), static_cast<std::size_t>(m));
      std::sort(drawn.begin(), drawn.end());
      rows.reserve(drawn.size());
      for (std::size_t r : drawn) rows.push_back(static_cast<Index>(r));
    }
    try {
      f.trees.push_back(
          fit_tree_rows(d, base, tree_ctrl, rows, static_cast<std::uint64_t>(b)));
    } catch (const NumericError& e) {
      throw NumericError("tree " + std::to_string(b) + ": " + e.what());
    } catch (const SpecificationError& e) {
      throw SpecificationError("tree " + std::to_string(b) + ": " + e.what());
    }
    f.subsamples.push_back(std::move(rows));
  }
  return f;
}

Vector nn_weights(const TransformationForest& f, const Profile& x) {
  std::vector<const TreeNode*> leaves;
  leaves.reserve(f.trees.size());
  for (const Tree& t : f.trees) leaves.push_back(&route_profile(t, x));
  return weights_for_leaves(f, leaves);
}

ForestParams forest_params(const TransformationForest& f, const Dataset& d,
                           const Profile& x) {
  if (d.n() != f.n_train) {
    throw ArgumentError("forest_params needs the forest's training data");
  }
  ForestParams out;
  out.nn = nn_weights(f, x);
  LocalFit fit = local_fit(f, d, out.nn, nullptr);
  out.theta = std::move(fit.theta);
  out.loglik = fit.loglik;
  out.fallback = fit.fallback;
  return out;
}

double forest_loglik(const TransformationForest& f, const Dataset& d) {
  if (d.n() != f.n_train) {
    throw ArgumentError("forest_loglik needs the forest's training data");
  }
  // Group rows by their per-tree leaf pattern: equal patterns share the
  // local fit exactly.
  std::map<LeafSignature, std::vector<Index>> groups;
  std::vector<std::vector<const TreeNode*>> group_leaves;
  std::map<LeafSignature, std::size_t> leaf_slot;
  for (Index i = 0; i < d.n(); ++i) {
    LeafSignature sig(f.trees.size());
    std::vector<const TreeNode*> leaves(f.trees.size());
    for (std::size_t b = 0; b < f.trees.size(); ++b) {
      leaves[b] = &route_leaf(f.trees[b], d, i);
      sig[b] = leaves[b]->id;
    }
    auto [it, inserted] = leaf_slot.emplace(sig, group_leaves.size());
    if (inserted) group_leaves.push_back(std::move(leaves));
    groups[sig].push_back(i);
  }

  FittedModel unconditional = mle(f.spec, d, f.ctrl.tree.fit);
  double total = 0.0;
  for (const auto& [sig, rows] : groups) {
    Vector nn = weights_for_leaves(f, group_leaves[leaf_slot.at(sig)]);
    LocalFit fit = local_fit(f, d, nn, &unconditional);
    LikelihoodProblem prob(f.spec, d.subset(rows));
    total += prob.loglik(fit.theta);
  }
  return total;
}

ImportanceResult var_importance(const TransformationForest& f, const Dataset& d,
                                Index k_perms, bool out_of_bag) {
  if (d.n() != f.n_train) {
    throw ArgumentError("var_importance needs the forest's training data");
  }
  if (k_perms < 1) throw ArgumentError("importance needs k_perms >= 1");

  ImportanceResult res;
  for (const Column& c : d.covariates()) res.vars.push_back(c.name);
  Index n_vars = static_cast<Index>(res.vars.size());
  res.importance = Vector::Zero(n_vars);

  auto plain_num = [&](const std::string& v, Index row) {
    return d.column(v).numeric[row];
  };
  auto plain_cat = [&](const std::string& v, Index row) -> const std::string& {
    const Column& c = d.column(v);
    return c.levels[static_cast<std::size_t>(c.codes[static_cast<std::size_t>(row)])];
  };

  for (std::size_t b = 0; b < f.trees.size(); ++b) {
    const Tree& tree = f.trees[b];
    std::vector<Index> rows;
    if (out_of_bag) {
      std::set<Index> in(f.subsamples[b].begin(), f.subsamples[b].end());
      for (Index i = 0; i < d.n(); ++i) {
        if (!in.count(i)) rows.push_back(i);
      }
      if (rows.empty()) continue;
    } else {
      rows = f.subsamples[b];
    }
    double baseline = tree_eval_loglik(tree, d, rows, plain_num, plain_cat);

    for (Index v = 0; v < n_vars; ++v) {
      if (!tree_uses_var(*tree.root, res.vars[static_cast<std::size_t>(v)])) {
        continue;  // routing cannot change: decrease is exactly zero
      }
      const Column& col = d.column(res.vars[static_cast<std::size_t>(v)]);
      double drop_sum = 0.0;
      for (Index k = 0; k < k_perms; ++k) {
        // Permute the variable's values within the evaluation rows.
        std::vector<Index> shuffled = rows;
        Rng rng(mix_seed(f.ctrl.seed, kPurposeVarimp + static_cast<std::uint64_t>(v),
                         static_cast<std::uint64_t>(k),
                         static_cast<std::uint64_t>(b)));
        rng.shuffle(shuffled);
        std::vector<Index> donor(static_cast<std::size_t>(d.n()));
        std::iota(donor.begin(), donor.end(), 0);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          donor[static_cast<std::size_t>(rows[r])] = shuffled[r];
        }

        auto perm_num = [&](const std::string& vn, Index row) {
          const Column& c = d.column(vn);
          return c.numeric[(vn == col.name) ? donor[static_cast<std::size_t>(row)] : row];
        };
        auto perm_cat = [&](const std::string& vn, Index row) -> const std::string& {
          const Column& c = d.column(vn);
          Index src = (vn == col.name) ? donor[static_cast<std::size_t>(row)] : row;
          return c.levels[static_cast<std::size_t>(c.codes[static_cast<std::size_t>(src)])];
        };
        double permuted = tree_eval_loglik(tree, d, rows, perm_num, perm_cat);
        drop_sum += baseline - permuted;
      }
      res.importance[v] += drop_sum / static_cast<double>(k_perms);
    }
  }
  res.importance /= static_cast<double>(f.trees.size());
  return res;
}

CurveTable partial_dependence(const TransformationForest& f, const Dataset& d,
                              const std::vector<std::string>& vars,
                              const PdpOptions& opt) {
  if (d.n() != f.n_train) {
    throw ArgumentError("partial_dependence needs the forest's training data");
  }
  if (vars.empty()) throw ArgumentError("partial dependence needs variables");
  if (opt.max_rows < 1 || opt.numeric_points < 1) {
    throw ArgumentError("partial dependence options must be positive");
  }
  std::vector<double> probs = opt.probs;
  if (probs.empty()) {
    for (int k = 1; k <= 9; ++k) probs.push_back(static_cast<double>(k) / 10.0);
  }

  // Per-variable grids, in the caller's variable order.
  std::vector<std::vector<std::string>> grids;
  std::vector<std::vector<double>> grid_nums(vars.size());
  std::string grid_var;  // last numeric variable: becomes the grid column
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const Column& col = d.column(vars[j]);
    std::vector<std::string> g;
    if (col.type == ColumnType::Categorical) {
      g = col.levels;
    } else {
      grid_nums[j] = numeric_grid(d, vars[j], opt.numeric_points);
      for (double x : grid_nums[j]) g.push_back(format_double(x));
      grid_var = vars[j];
    }
    if (g.empty()) throw SpecificationError("empty grid for '" + vars[j] + "'");
    grids.push_back(std::move(g));
  }

  // Fixed row subsample shared by every grid point.
  std::vector<Index> rows;
  if (f.n_train <= opt.max_rows) {
    rows.resize(static_cast<std::size_t>(f.n_train));
    std::iota(rows.begin(), rows.end(), 0);
  } else {
    Rng rng(mix_seed(f.ctrl.seed, kPurposePdp));
    std::vector<std::size_t> drawn = rng.sample_without_replacement(
        static_cast<std::size_t>(f.n_train),
        static_cast<std::size_t>(opt.max_rows));
    std::sort(drawn.begin(), drawn.end());
    for (std::size_t r : drawn) rows.push_back(static_cast<Index>(r));
  }

  FittedModel unconditional = mle(f.spec, d, f.ctrl.tree.fit);
  std::map<LeafSignature, Vector> fit_cache;

  CurveTable table;
  std::vector<std::size_t> at(vars.size(), 0);
  while (true) {
    // Average local parameters over the subsample with vars overridden.
    Vector theta_sum = Vector::Zero(f.spec.n_params());
    for (Index row : rows) {
      Profile p = profile_from_row(d, row);
      for (std::size_t j = 0; j < vars.size(); ++j) p[vars[j]] = grids[j][at[j]];
      LeafSignature sig(f.trees.size());
      std::vector<const TreeNode*> leaves(f.trees.size());
      for (std::size_t b = 0; b < f.trees.size(); ++b) {
        leaves[b] = &route_profile(f.trees[b], p);
        sig[b] = leaves[b]->id;
      }
      auto it = fit_cache.find(sig);
      if (it == fit_cache.end()) {
        Vector nn = weights_for_leaves(f, leaves);
        LocalFit fit = local_fit(f, d, nn, &unconditional);
        it = fit_cache.emplace(sig, std::move(fit.theta)).first;
      }
      theta_sum += it->second;
    }
    Vector theta = theta_sum / static_cast<double>(rows.size());

    std::string label;
    double grid_value = 0.0;
    for (std::size_t j = 0; j < vars.size(); ++j) {
      if (vars[j] == grid_var) {
        grid_value = grid_nums[j][at[j]];
        continue;
      }
      if (!label.empty()) label += ":";
      label += vars[j] + "=" + grids[j][at[j]];
    }

    FittedModel averaged;
    averaged.spec = f.spec;
    averaged.theta = theta;
    Profile none;
    ProfileCurve curve(averaged, none);
    for (double p : probs) {
      CurveTable::Row row;
      row.profile = label;
      row.functional = "q" + format_double(p);
      row.grid = grid_value;
      row.value = curve.quantile(p);
      table.rows.push_back(std::move(row));
    }

    // Advance the mixed-radix grid counter.
    std::size_t j = vars.size();
    while (j > 0) {
      --j;
      if (++at[j] < grids[j].size()) break;
      at[j] = 0;
      if (j == 0) return table;
    }
  }
}

}  // namespace transmod
