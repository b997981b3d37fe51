#include "transmod/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <utility>

#include "transmod/data.hpp"
#include "transmod/errors.hpp"
#include "transmod/rng.hpp"

namespace transmod {

namespace {

constexpr std::uint64_t kPurposePerm = 0x7065726dULL;
constexpr std::uint64_t kPurposeMtry = 0x6d747279ULL;
constexpr int kMaxSplitLevels = 10;

// Covariate transformation for the independence test: raw column for
// numeric variables, one indicator column per level for categorical ones.
struct CandidateData {
  std::size_t var_index = 0;
  Matrix g;           // node_n x k
  Vector col_sum;     // per column
  Vector col_var;     // sum((g - mean)^2) per column
  double c_obs = 0.0;
  bool testable = false;
};

struct ColumnMoments {
  Vector sum;
  Vector var;  // sum((s - mean)^2) per column
};

ColumnMoments column_moments(const Matrix& m) {
  ColumnMoments out;
  out.sum = m.colwise().sum().transpose();
  Index n = m.rows();
  out.var.resize(m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    double mean = out.sum[j] / static_cast<double>(n);
    out.var[j] = (m.col(j).array() - mean).square().sum();
  }
  return out;
}

bool usable_variance(double var, double sum_sq) {
  return var > 1e-20 * std::max(1.0, sum_sq);
}

// Max-absolute standardized component of T under the permutation null:
// E T_jk = sum(S_j) sum(g_k) / n, Var T_jk = var(S_j) var(g_k) / (n - 1).
double max_abs_stat(const Matrix& t, const ColumnMoments& s_mom,
                    const Vector& g_sum, const Vector& g_var,
                    const Vector& g_sum_sq, const Vector& s_sum_sq, Index n,
                    bool* any_valid = nullptr) {
  double best = 0.0;
  bool valid = false;
  double inv_n = 1.0 / static_cast<double>(n);
  double inv_nm1 = 1.0 / static_cast<double>(n - 1);
  for (Index j = 0; j < t.rows(); ++j) {
    if (!usable_variance(s_mom.var[j], s_sum_sq[j])) continue;
    for (Index k = 0; k < t.cols(); ++k) {
      if (!usable_variance(g_var[k], g_sum_sq[k])) continue;
      double mean = s_mom.sum[j] * g_sum[k] * inv_n;
      double sd = std::sqrt(s_mom.var[j] * g_var[k] * inv_nm1);
      double z = std::abs((t(j, k) - mean) / sd);
      best = std::max(best, z);
      valid = true;
    }
  }
  if (any_valid) *any_valid = valid;
  return best;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& d, const ModelSpec& spec, const TreeControl& ctrl,
              std::uint64_t tree_index)
      : d_(d), spec_(spec), ctrl_(ctrl), tree_index_(tree_index) {
    for (const Column& c : d.covariates()) vars_.push_back(c.name);
  }

  std::unique_ptr<TreeNode> build(std::vector<Index> rows, Index id, int depth,
                                  const FittedModel* parent) {
    auto node = std::make_unique<TreeNode>();
    node->id = id;
    node->n_rows = static_cast<Index>(rows.size());

    Dataset node_d = d_.subset(rows);
    node->weighted_n = node_d.weight_total();

    FittedModel fm;
    if (node->n_rows < spec_.n_params()) {
      if (!parent) {
        throw SpecificationError(
            "tree root has fewer observations than parameters");
      }
      node->forced_leaf = true;
      return make_leaf(std::move(node), *parent, std::move(rows));
    }
    LikelihoodProblem prob(spec_, node_d);
    try {
      fm = mle_problem(prob, ctrl_.fit);
    } catch (const SpecificationError&) {
      if (!parent) throw;
      node->forced_leaf = true;
      return make_leaf(std::move(node), *parent, std::move(rows));
    } catch (const NumericError&) {
      if (!parent) throw;
      node->forced_leaf = true;
      return make_leaf(std::move(node), *parent, std::move(rows));
    }

    bool depth_ok = ctrl_.max_depth < 0 || depth < ctrl_.max_depth;
    if (!depth_ok || node->weighted_n < ctrl_.min_split ||
        node->weighted_n < 2.0 * ctrl_.min_leaf) {
      return make_leaf(std::move(node), std::move(fm), std::move(rows));
    }

    Matrix scores = prob.score_matrix(fm.theta);
    ColumnMoments s_mom = column_moments(scores);
    Vector s_sum_sq = scores.array().square().matrix().colwise().sum().transpose();

    std::vector<CandidateData> cands = candidates(node_d, scores, s_mom,
                                                  s_sum_sq, id);
    std::size_t best = cands.size();
    if (ctrl_.alpha < 1.0) {
      std::vector<double> p_adj = permutation_p_values(scores, s_mom, s_sum_sq,
                                                       cands, id);
      for (std::size_t m = 0; m < cands.size(); ++m) {
        if (!cands[m].testable) continue;
        if (best == cands.size() || p_adj[m] < p_adj[best]) best = m;
      }
      if (best < cands.size()) {
        node->p_value = p_adj[best];
        node->selected_var = vars_[cands[best].var_index];
      }
      if (best == cands.size() || p_adj[best] >= ctrl_.alpha) {
        return make_leaf(std::move(node), std::move(fm), std::move(rows));
      }
    } else {
      for (std::size_t m = 0; m < cands.size(); ++m) {
        if (!cands[m].testable) continue;
        if (best == cands.size() || cands[m].c_obs > cands[best].c_obs) {
          best = m;
        }
      }
      if (best == cands.size()) {
        return make_leaf(std::move(node), std::move(fm), std::move(rows));
      }
      node->selected_var = vars_[cands[best].var_index];
    }

    const Column& col = d_.column(vars_[cands[best].var_index]);
    std::vector<Index> left_rows, right_rows;
    bool found;
    if (col.type == ColumnType::Numeric) {
      found = split_numeric(*node, col, rows, scores, s_mom, s_sum_sq,
                            node_d.weights(), left_rows, right_rows);
    } else {
      found = split_categorical(*node, col, rows, scores, s_mom, s_sum_sq,
                                node_d.weights(), left_rows, right_rows);
    }
    if (!found) {
      return make_leaf(std::move(node), std::move(fm), std::move(rows));
    }

    node->left = build(std::move(left_rows), 2 * id, depth + 1, &fm);
    node->right = build(std::move(right_rows), 2 * id + 1, depth + 1, &fm);
    return node;
  }

 private:
  std::unique_ptr<TreeNode> make_leaf(std::unique_ptr<TreeNode> node,
                                      FittedModel fm, std::vector<Index> rows) {
    node->model = std::move(fm);
    node->rows = std::move(rows);
    return node;
  }

  // Variables eligible at this node, restricted to an mtry-subset when the
  // control asks for one. Categorical variables with more than
  // kMaxSplitLevels levels present are not candidates (exhaustive
  // partition search would be infeasible).
  std::vector<CandidateData> candidates(const Dataset& node_d,
                                        const Matrix& scores,
                                        const ColumnMoments& s_mom,
                                        const Vector& s_sum_sq, Index id) {
    std::vector<std::size_t> pool(vars_.size());
    std::iota(pool.begin(), pool.end(), 0);
    if (ctrl_.mtry > 0 &&
        ctrl_.mtry < static_cast<Index>(vars_.size())) {
      Rng rng(mix_seed(ctrl_.seed, tree_index_, static_cast<std::uint64_t>(id),
                       kPurposeMtry));
      std::vector<std::size_t> drawn = rng.sample_without_replacement(
          vars_.size(), static_cast<std::size_t>(ctrl_.mtry));
      std::sort(drawn.begin(), drawn.end());
      pool = std::move(drawn);
    }

    Index n = scores.rows();
    std::vector<CandidateData> out;
    for (std::size_t v : pool) {
      const Column& col = node_d.column(vars_[v]);
      CandidateData cand;
      cand.var_index = v;
      if (col.type == ColumnType::Numeric) {
        cand.g = col.numeric;
      } else {
        Index present = 0;
        std::vector<int> seen(col.levels.size(), 0);
        for (int code : col.codes) {
          if (!seen[static_cast<std::size_t>(code)]) {
            seen[static_cast<std::size_t>(code)] = 1;
            ++present;
          }
        }
        if (present > kMaxSplitLevels) continue;
        cand.g = Matrix::Zero(n, static_cast<Index>(col.levels.size()));
        for (Index i = 0; i < n; ++i) {
          cand.g(i, static_cast<Index>(col.codes[static_cast<std::size_t>(i)])) =
              1.0;
        }
      }
      ColumnMoments gm = column_moments(cand.g);
      cand.col_sum = gm.sum;
      cand.col_var = gm.var;
      Vector g_sum_sq = cand.g.array().square().matrix().colwise().sum().transpose();
      Matrix t = scores.transpose() * cand.g;
      cand.c_obs = max_abs_stat(t, s_mom, cand.col_sum, cand.col_var, g_sum_sq,
                                s_sum_sq, n, &cand.testable);
      out.push_back(std::move(cand));
    }
    return out;
  }

  // Monte-Carlo p-values from one shared permutation stream per node; the
  // score rows are permuted in batches and hit every candidate with the
  // same permutations, so candidate p-values are comparable.
  std::vector<double> permutation_p_values(const Matrix& scores,
                                           const ColumnMoments& s_mom,
                                           const Vector& s_sum_sq,
                                           const std::vector<CandidateData>& cands,
                                           Index id) {
    Index n = scores.rows();
    Index p = scores.cols();
    Index n_perm = ctrl_.n_perm;
    Index batch = std::clamp<Index>(4000000 / std::max<Index>(1, n * p), 16, 512);

    std::vector<Index> exceed(cands.size(), 0);
    std::vector<Index> pi(static_cast<std::size_t>(n));
    std::iota(pi.begin(), pi.end(), 0);
    Rng rng(mix_seed(ctrl_.seed, tree_index_, static_cast<std::uint64_t>(id),
                     kPurposePerm));

    Matrix s_big(n, batch * p);
    std::vector<Vector> g_sum_sq(cands.size());
    for (std::size_t m = 0; m < cands.size(); ++m) {
      if (cands[m].testable) {
        g_sum_sq[m] = cands[m].g.array().square().matrix().colwise().sum().transpose();
      }
    }

    for (Index done = 0; done < n_perm; done += batch) {
      Index k = std::min(batch, n_perm - done);
      for (Index b = 0; b < k; ++b) {
        rng.shuffle(pi);
        for (Index i = 0; i < n; ++i) {
          s_big.block(i, b * p, 1, p) =
              scores.row(static_cast<Index>(pi[static_cast<std::size_t>(i)]));
        }
      }
      for (std::size_t m = 0; m < cands.size(); ++m) {
        if (!cands[m].testable) continue;
        // z(kk, b*p + j) = sum_i g_ik * s_perm_b(i, j)
        Matrix z = cands[m].g.transpose() * s_big.leftCols(k * p);
        for (Index b = 0; b < k; ++b) {
          Matrix t = z.block(0, b * p, z.rows(), p).transpose();
          double c = max_abs_stat(t, s_mom, cands[m].col_sum, cands[m].col_var,
                                  g_sum_sq[m], s_sum_sq, n);
          if (c >= cands[m].c_obs) ++exceed[m];
        }
      }
    }

    Index tested = 0;
    for (const CandidateData& c : cands) {
      if (c.testable) ++tested;
    }
    std::vector<double> p_adj(cands.size(), 1.0);
    for (std::size_t m = 0; m < cands.size(); ++m) {
      if (!cands[m].testable) continue;
      double raw = static_cast<double>(1 + exceed[m]) /
                   static_cast<double>(n_perm + 1);
      p_adj[m] = std::min(1.0, raw * static_cast<double>(tested));
    }
    return p_adj;
  }

  // Cutpoint with the largest two-sample score statistic among unique
  // values inside the weighted 10%..90% range; ties keep the smaller cut.
  bool split_numeric(TreeNode& node, const Column& col,
                     const std::vector<Index>& rows, const Matrix& scores,
                     const ColumnMoments& s_mom, const Vector& s_sum_sq,
                     const Vector& w, std::vector<Index>& left_rows,
                     std::vector<Index>& right_rows) {
    Index n = static_cast<Index>(rows.size());
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = col.numeric[rows[static_cast<std::size_t>(i)]];
    double q10 = weighted_quantile(x, w, 0.10);
    double q90 = weighted_quantile(x, w, 0.90);
    double total_w = w.sum();

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return x[a] < x[b]; });

    Vector cum = Vector::Zero(scores.cols());
    double cum_w = 0.0;
    Index cum_n = 0;
    double best_stat = -1.0;
    double best_cut = 0.0;
    double inv_n = 1.0 / static_cast<double>(n);
    double inv_nm1 = 1.0 / static_cast<double>(n - 1);

    for (Index r = 0; r < n;) {
      double v = x[order[static_cast<std::size_t>(r)]];
      while (r < n && x[order[static_cast<std::size_t>(r)]] == v) {
        Index i = order[static_cast<std::size_t>(r)];
        cum += scores.row(i).transpose();
        cum_w += w[i];
        ++cum_n;
        ++r;
      }
      if (r >= n) break;  // everything left, no split
      if (v < q10 || v > q90) continue;
      if (cum_w < ctrl_.min_leaf || total_w - cum_w < ctrl_.min_leaf) continue;
      double g_var = static_cast<double>(cum_n) *
                     static_cast<double>(n - cum_n) * inv_n;
      if (!usable_variance(g_var, static_cast<double>(cum_n))) continue;
      double stat = 0.0;
      for (Index j = 0; j < scores.cols(); ++j) {
        if (!usable_variance(s_mom.var[j], s_sum_sq[j])) continue;
        double mean = s_mom.sum[j] * static_cast<double>(cum_n) * inv_n;
        double sd = std::sqrt(s_mom.var[j] * g_var * inv_nm1);
        stat = std::max(stat, std::abs((cum[j] - mean) / sd));
      }
      if (stat > best_stat) {
        best_stat = stat;
        best_cut = v;
      }
    }
    if (best_stat < 0.0) return false;

    node.split_var = col.name;
    node.split_is_numeric = true;
    node.cutpoint = best_cut;
    for (Index i = 0; i < n; ++i) {
      Index row = rows[static_cast<std::size_t>(i)];
      (x[i] <= best_cut ? left_rows : right_rows).push_back(row);
    }
    return true;
  }

  // Exhaustive search over binary partitions of the levels present in the
  // node (first present level pinned to the left side). Levels absent from
  // the node but known in training route left.
  bool split_categorical(TreeNode& node, const Column& col,
                         const std::vector<Index>& rows, const Matrix& scores,
                         const ColumnMoments& s_mom, const Vector& s_sum_sq,
                         const Vector& w, std::vector<Index>& left_rows,
                         std::vector<Index>& right_rows) {
    Index n = static_cast<Index>(rows.size());
    Index n_levels = static_cast<Index>(col.levels.size());
    Matrix level_s = Matrix::Zero(n_levels, scores.cols());
    Vector level_w = Vector::Zero(n_levels);
    std::vector<Index> level_n(static_cast<std::size_t>(n_levels), 0);
    std::vector<int> code(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      int c = col.codes[rows[static_cast<std::size_t>(i)]];
      code[static_cast<std::size_t>(i)] = c;
      level_s.row(c) += scores.row(i);
      level_w[c] += w[i];
      ++level_n[static_cast<std::size_t>(c)];
    }

    std::vector<Index> present;
    for (Index l = 0; l < n_levels; ++l) {
      if (level_n[static_cast<std::size_t>(l)] > 0) present.push_back(l);
    }
    Index lp = static_cast<Index>(present.size());
    if (lp < 2 || lp > kMaxSplitLevels) return false;

    double total_w = w.sum();
    double inv_n = 1.0 / static_cast<double>(n);
    double inv_nm1 = 1.0 / static_cast<double>(n - 1);
    double best_stat = -1.0;
    std::uint32_t best_mask = 0;
    std::uint32_t max_mask =
        (1u << static_cast<unsigned>(lp - 1)) - 1;  // all-left excluded

    for (std::uint32_t mask = 0; mask < max_mask; ++mask) {
      Vector t = level_s.row(present[0]).transpose();
      double wl = level_w[present[0]];
      Index nl = level_n[static_cast<std::size_t>(present[0])];
      for (Index b = 0; b + 1 < lp; ++b) {
        if (mask & (1u << static_cast<unsigned>(b))) {
          Index l = present[static_cast<std::size_t>(b + 1)];
          t += level_s.row(l).transpose();
          wl += level_w[l];
          nl += level_n[static_cast<std::size_t>(l)];
        }
      }
      if (wl < ctrl_.min_leaf || total_w - wl < ctrl_.min_leaf) continue;
      double g_var =
          static_cast<double>(nl) * static_cast<double>(n - nl) * inv_n;
      if (!usable_variance(g_var, static_cast<double>(nl))) continue;
      double stat = 0.0;
      for (Index j = 0; j < scores.cols(); ++j) {
        if (!usable_variance(s_mom.var[j], s_sum_sq[j])) continue;
        double mean = s_mom.sum[j] * static_cast<double>(nl) * inv_n;
        double sd = std::sqrt(s_mom.var[j] * g_var * inv_nm1);
        stat = std::max(stat, std::abs((t[j] - mean) / sd));
      }
      if (stat > best_stat) {
        best_stat = stat;
        best_mask = mask;
      }
    }
    if (best_stat < 0.0) return false;

    std::vector<char> goes_left(static_cast<std::size_t>(n_levels), 1);
    for (Index b = 0; b + 1 < lp; ++b) {
      if (!(best_mask & (1u << static_cast<unsigned>(b)))) {
        goes_left[static_cast<std::size_t>(present[static_cast<std::size_t>(b + 1)])] = 0;
      }
    }
    node.split_var = col.name;
    node.split_is_numeric = false;
    for (Index l = 0; l < n_levels; ++l) {
      std::size_t lu = static_cast<std::size_t>(l);
      bool in_node = level_n[lu] > 0;
      bool left = goes_left[lu] || !in_node;
      (left ? node.left_levels : node.right_levels).push_back(col.levels[lu]);
    }
    for (Index i = 0; i < n; ++i) {
      Index row = rows[static_cast<std::size_t>(i)];
      bool left = goes_left[static_cast<std::size_t>(code[static_cast<std::size_t>(i)])];
      (left ? left_rows : right_rows).push_back(row);
    }
    return true;
  }

  const Dataset& d_;
  const ModelSpec& spec_;
  const TreeControl& ctrl_;
  std::uint64_t tree_index_;
  std::vector<std::string> vars_;
};

// Content-based row order: response, covariates in declared order (levels
// compared by name), then weight. Makes trees invariant to row shuffles.
std::vector<Index> canonical_order(const Dataset& d, std::vector<Index> rows) {
  const Vector& y = d.response();
  const Vector& w = d.weights();
  const std::vector<Column>& cols = d.covariates();
  std::sort(rows.begin(), rows.end(), [&](Index a, Index b) {
    if (y[a] != y[b]) return y[a] < y[b];
    for (const Column& c : cols) {
      if (c.type == ColumnType::Numeric) {
        if (c.numeric[a] != c.numeric[b]) return c.numeric[a] < c.numeric[b];
      } else {
        const std::string& la = c.levels[static_cast<std::size_t>(
            c.codes[static_cast<std::size_t>(a)])];
        const std::string& lb = c.levels[static_cast<std::size_t>(
            c.codes[static_cast<std::size_t>(b)])];
        if (la != lb) return la < lb;
      }
    }
    return w[a] < w[b];
  });
  return rows;
}

void check_complete(const Dataset& d) {
  for (Index i = 0; i < d.n(); ++i) {
    if (!std::isfinite(d.response()[i])) {
      throw DataError("missing or non-finite response; drop such rows before "
                      "tree fitting");
    }
  }
  for (const Column& c : d.covariates()) {
    for (Index i = 0; i < c.size(); ++i) {
      if (c.is_missing(i)) {
        throw DataError("missing values in '" + c.name +
                        "'; drop them before tree fitting");
      }
    }
  }
}

const TreeNode& route(const TreeNode& node,
                      const std::function<double(const std::string&)>& num,
                      const std::function<std::string(const std::string&)>& cat) {
  const TreeNode* cur = &node;
  while (!cur->is_leaf()) {
    bool left;
    if (cur->split_is_numeric) {
      left = num(cur->split_var) <= cur->cutpoint;
    } else {
      std::string level = cat(cur->split_var);
      if (std::find(cur->left_levels.begin(), cur->left_levels.end(), level) !=
          cur->left_levels.end()) {
        left = true;
      } else if (std::find(cur->right_levels.begin(), cur->right_levels.end(),
                           level) != cur->right_levels.end()) {
        left = false;
      } else {
        throw RoutingError("level '" + level + "' of '" + cur->split_var +
                           "' was not seen in training");
      }
    }
    cur = left ? cur->left.get() : cur->right.get();
  }
  return *cur;
}

Index count_leaves(const TreeNode& n) {
  if (n.is_leaf()) return 1;
  return count_leaves(*n.left) + count_leaves(*n.right);
}

Index node_depth(const TreeNode& n) {
  if (n.is_leaf()) return 0;
  return 1 + std::max(node_depth(*n.left), node_depth(*n.right));
}

void collect_leaves(const TreeNode& n, std::vector<const TreeNode*>& out) {
  if (n.is_leaf()) {
    out.push_back(&n);
    return;
  }
  collect_leaves(*n.left, out);
  collect_leaves(*n.right, out);
}

}  // namespace

void TreeControl::validate() const {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw ArgumentError("tree alpha must be in (0, 1]");
  }
  if (!(min_leaf > 0.0) || min_split < min_leaf) {
    throw ArgumentError("tree sizes need 0 < min leaf <= min split");
  }
  if (n_perm < 1) throw ArgumentError("tree permutation count must be >= 1");
  if (mtry < 0) throw ArgumentError("mtry must be >= 0");
  fit.validate();
}

Index Tree::n_leaves() const { return root ? count_leaves(*root) : 0; }

Index Tree::depth() const { return root ? node_depth(*root) : 0; }

Tree fit_tree_rows(const Dataset& d, const ModelSpec& base,
                   const TreeControl& ctrl, const std::vector<Index>& rows,
                   std::uint64_t tree_index) {
  ctrl.validate();
  if (!base.covariate_names().empty() || !base.strata.trivial() ||
      base.shift_dim() > 0) {
    throw SpecificationError("tree base model must be unconditional");
  }
  if (rows.empty()) throw ArgumentError("tree needs at least one row");

  Tree t;
  t.spec = base;
  t.ctrl = ctrl;
  t.rows = canonical_order(d, rows);
  TreeBuilder builder(d, base, ctrl, tree_index);
  t.root = builder.build(t.rows, 1, 0, nullptr);
  return t;
}

Tree fit_tree(const Dataset& d, const ModelSpec& base, const TreeControl& ctrl) {
  check_complete(d);
  std::vector<Index> rows(static_cast<std::size_t>(d.n()));
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree_rows(d, base, ctrl, rows, 0);
}

const TreeNode& route_profile(const Tree& t, const Profile& x) {
  return route(
      *t.root, [&](const std::string& v) { return profile_numeric(x, v); },
      [&](const std::string& v) { return profile_value(x, v); });
}

const TreeNode& route_row(const Tree& t, const Dataset& d, Index i) {
  return route(
      *t.root,
      [&](const std::string& v) {
        const Column& c = d.column(v);
        if (c.is_missing(i)) {
          throw DataError("missing value in '" + v + "' while routing");
        }
        return c.numeric[i];
      },
      [&](const std::string& v) {
        const Column& c = d.column(v);
        if (c.is_missing(i)) {
          throw DataError("missing value in '" + v + "' while routing");
        }
        return c.levels[static_cast<std::size_t>(c.codes[static_cast<std::size_t>(i)])];
      });
}

const FittedModel& predict_tree(const Tree& t, const Profile& x) {
  return *route_profile(t, x).model;
}

double tree_loglik(const Tree& t, const Dataset& d) {
  std::map<Index, std::vector<Index>> by_leaf;
  for (Index i = 0; i < d.n(); ++i) {
    by_leaf[route_row(t, d, i).id].push_back(i);
  }
  std::vector<const TreeNode*> leaves;
  collect_leaves(*t.root, leaves);
  double total = 0.0;
  for (const TreeNode* leaf : leaves) {
    auto it = by_leaf.find(leaf->id);
    if (it == by_leaf.end()) continue;
    LikelihoodProblem prob(leaf->model->spec, d.subset(it->second));
    total += prob.loglik(leaf->model->theta);
  }
  return total;
}

}  // namespace transmod
