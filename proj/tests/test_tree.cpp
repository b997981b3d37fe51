#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "transmod/errors.hpp"
#include "transmod/tree.hpp"

using namespace transmod;
using testutil::categorical_column;
using testutil::numeric_column;
using testutil::unconditional_spec;

namespace {

// Location shift in y driven by the sign of x1; x2 and x3 are pure noise.
Dataset signal_dataset(Index n, std::uint64_t seed, double shift_size) {
  Rng rng(seed);
  Vector y(n), x1(n), x2(n), x3(n), w;
  for (Index i = 0; i < n; ++i) {
    x1[i] = rng.uniform(-1.0, 1.0);
    x2[i] = rng.uniform(0.0, 10.0);
    x3[i] = rng.normal();
    y[i] = (x1[i] > 0.0 ? shift_size : 0.0) + rng.normal();
  }
  return Dataset("y", y,
                 {numeric_column("x1", x1), numeric_column("x2", x2),
                  numeric_column("x3", x3)},
                 w, "");
}

ModelSpec bernstein_spec(const Dataset& d, int order) {
  Support s(d.response().minCoeff() - 1.0, d.response().maxCoeff() + 1.0);
  return unconditional_spec(d, TransformationBasis({BasisBlock(BernsteinBasis(order, s))}),
                            LinkKind::Logit);
}

TreeControl quick_ctrl() {
  TreeControl c;
  c.alpha = 0.05;
  c.min_split = 50.0;
  c.min_leaf = 20.0;
  c.n_perm = 199;
  c.seed = 1;
  return c;
}

void walk(const TreeNode& n, const std::function<void(const TreeNode&)>& fn) {
  fn(n);
  if (!n.is_leaf()) {
    walk(*n.left, fn);
    walk(*n.right, fn);
  }
}

}  // namespace

TEST_SUITE("tree") {

TEST_CASE("control and base-spec validation") {
  Dataset d = signal_dataset(100, 1, 0.0);
  ModelSpec spec = bernstein_spec(d, 3);

  TreeControl bad = quick_ctrl();
  bad.alpha = 0.0;
  CHECK_THROWS_AS(fit_tree(d, spec, bad), ArgumentError);
  bad = quick_ctrl();
  bad.min_split = 10.0;
  bad.min_leaf = 20.0;
  CHECK_THROWS_AS(fit_tree(d, spec, bad), ArgumentError);
  bad = quick_ctrl();
  bad.n_perm = 0;
  CHECK_THROWS_AS(fit_tree(d, spec, bad), ArgumentError);

  ModelSpec conditioned = spec;
  conditioned.shifts = shift_design(d, {{ShiftTerm::Kind::Main, "x2", ""}});
  CHECK_THROWS_AS(fit_tree(d, conditioned, quick_ctrl()), SpecificationError);

  TreeControl defaults;
  CHECK(defaults.alpha == 0.05);
  CHECK(defaults.min_split == 200.0);
  CHECK(defaults.min_leaf == 70.0);
  CHECK(defaults.n_perm == 9999);
}

TEST_CASE("a strong numeric signal splits at the right cutpoint") {
  Dataset d = signal_dataset(600, 2, 3.0);
  Tree t = fit_tree(d, bernstein_spec(d, 4), quick_ctrl());

  REQUIRE_FALSE(t.root->is_leaf());
  CHECK(t.root->split_var == "x1");
  CHECK(t.root->split_is_numeric);
  CHECK(t.root->cutpoint > -0.3);
  CHECK(t.root->cutpoint < 0.3);
  CHECK(t.root->selected_var == "x1");
  CHECK(t.root->p_value < 0.05);
  CHECK(t.root->id == 1);
  CHECK(t.root->left->id == 2);
  CHECK(t.root->right->id == 3);

  // Side medians reflect the generator shift.
  auto median_of = [&](const TreeNode& leaf_side) {
    std::vector<double> ys;
    walk(leaf_side, [&](const TreeNode& n) {
      if (n.is_leaf())
        for (Index r : n.rows) ys.push_back(d.response()[r]);
    });
    std::sort(ys.begin(), ys.end());
    return ys[ys.size() / 2];
  };
  CHECK(median_of(*t.root->right) - median_of(*t.root->left) > 2.0);
}

TEST_CASE("p-values reach exactly the bonferroni floor under an overwhelming signal") {
  Dataset d = signal_dataset(500, 3, 4.0);
  TreeControl ctrl = quick_ctrl();
  ctrl.n_perm = 199;
  Tree t = fit_tree(d, bernstein_spec(d, 3), ctrl);
  REQUIRE_FALSE(t.root->is_leaf());
  // Three testable candidates, zero exceedances: p = 3 * 1/(199+1).
  CHECK(t.root->p_value ==
        doctest::Approx(3.0 / 200.0).epsilon(1e-14));
}

TEST_CASE("fits are invariant to row order") {
  Dataset d = signal_dataset(400, 4, 2.5);
  std::vector<Index> perm(400);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(77);
  rng.shuffle(perm);
  Dataset shuffled = d.subset(perm);

  Tree a = fit_tree(d, bernstein_spec(d, 4), quick_ctrl());
  Tree b = fit_tree(shuffled, bernstein_spec(shuffled, 4), quick_ctrl());

  CHECK(a.root->split_var == b.root->split_var);
  CHECK(a.root->cutpoint == b.root->cutpoint);  // bit-identical
  CHECK(a.n_leaves() == b.n_leaves());
  CHECK(a.depth() == b.depth());
  CHECK(a.root->p_value == b.root->p_value);
  CHECK(tree_loglik(a, d) == doctest::Approx(tree_loglik(b, shuffled)).epsilon(1e-12));
}

TEST_CASE("categorical splits partition all training levels") {
  Rng rng(9);
  const Index n = 500;
  Vector y(n), w;
  Column g = categorical_column("g", {"a", "b", "c", "d"}, {0.25, 0.25, 0.25, 0.25}, n, rng);
  for (Index i = 0; i < n; ++i) {
    const int code = g.codes[static_cast<std::size_t>(i)];
    y[i] = (code >= 2 ? 2.5 : 0.0) + rng.normal();
  }
  Dataset d("y", y, {g}, w, "");
  Tree t = fit_tree(d, bernstein_spec(d, 3), quick_ctrl());

  REQUIRE_FALSE(t.root->is_leaf());
  CHECK(t.root->split_var == "g");
  CHECK_FALSE(t.root->split_is_numeric);
  std::vector<std::string> all = t.root->left_levels;
  all.insert(all.end(), t.root->right_levels.begin(), t.root->right_levels.end());
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<std::string>{"a", "b", "c", "d"});
  // The induced partition separates the two generator groups.
  std::vector<std::string> left = t.root->left_levels;
  std::sort(left.begin(), left.end());
  const bool ab_left = left == std::vector<std::string>{"a", "b"};
  std::vector<std::string> right = t.root->right_levels;
  std::sort(right.begin(), right.end());
  const bool ab_right = right == std::vector<std::string>{"a", "b"};
  CHECK((ab_left || ab_right));
}

TEST_CASE("routing: boundary values go left, unseen levels throw") {
  Dataset d = signal_dataset(600, 5, 3.0);
  Tree t = fit_tree(d, bernstein_spec(d, 4), quick_ctrl());
  REQUIRE_FALSE(t.root->is_leaf());

  const double cut = t.root->cutpoint;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", cut);
  Profile at_cut{{"x1", buf}, {"x2", "5"}, {"x3", "0"}};
  const TreeNode& leaf = route_profile(t, at_cut);
  // x == cutpoint routes into the left subtree.
  bool under_left = false;
  walk(*t.root->left, [&](const TreeNode& n) { under_left = under_left || &n == &leaf; });
  CHECK(under_left);

  // route_row agrees with route_profile on every training row.
  for (Index i = 0; i < 50; ++i) {
    char b1[32], b2[32], b3[32];
    std::snprintf(b1, sizeof b1, "%.17g", d.column("x1").numeric[i]);
    std::snprintf(b2, sizeof b2, "%.17g", d.column("x2").numeric[i]);
    std::snprintf(b3, sizeof b3, "%.17g", d.column("x3").numeric[i]);
    Profile x{{"x1", b1}, {"x2", b2}, {"x3", b3}};
    CHECK(route_row(t, d, i).id == route_profile(t, x).id);
  }

  // Unseen categorical level on a categorical split.
  Rng rng(10);
  Column g = categorical_column("g", {"a", "b"}, {0.5, 0.5}, 300, rng);
  Vector y2(300), w2;
  for (Index i = 0; i < 300; ++i)
    y2[i] = (g.codes[static_cast<std::size_t>(i)] == 1 ? 3.0 : 0.0) + rng.normal();
  Dataset d2("y", y2, {g}, w2, "");
  Tree t2 = fit_tree(d2, bernstein_spec(d2, 3), quick_ctrl());
  REQUIRE_FALSE(t2.root->is_leaf());
  CHECK_THROWS_AS(route_profile(t2, Profile{{"g", "zz"}}), RoutingError);
}

TEST_CASE("size controls bound every node") {
  Dataset d = signal_dataset(900, 6, 2.0);
  TreeControl ctrl = quick_ctrl();
  ctrl.min_split = 120.0;
  ctrl.min_leaf = 45.0;
  Tree t = fit_tree(d, bernstein_spec(d, 4), ctrl);

  walk(*t.root, [&](const TreeNode& n) {
    if (n.is_leaf()) {
      if (!n.forced_leaf) CHECK(n.weighted_n >= ctrl.min_leaf);
    } else {
      CHECK(n.weighted_n >= ctrl.min_split);
      CHECK(n.left->id == 2 * n.id);
      CHECK(n.right->id == 2 * n.id + 1);
      CHECK(n.left->n_rows + n.right->n_rows == n.n_rows);
    }
  });
}

TEST_CASE("max_depth caps the tree and zero forces a stump") {
  Dataset d = signal_dataset(800, 7, 3.0);
  TreeControl ctrl = quick_ctrl();
  ctrl.max_depth = 0;
  Tree stump = fit_tree(d, bernstein_spec(d, 4), ctrl);
  CHECK(stump.root->is_leaf());
  CHECK(stump.n_leaves() == 1);
  CHECK(stump.depth() == 0);

  ctrl.max_depth = 1;
  Tree one = fit_tree(d, bernstein_spec(d, 4), ctrl);
  CHECK(one.depth() <= 1);
  CHECK(one.n_leaves() <= 2);
}

TEST_CASE("alpha at one disables the permutation gate") {
  Dataset d = signal_dataset(300, 8, 2.5);
  TreeControl ctrl = quick_ctrl();
  ctrl.alpha = 1.0;
  ctrl.max_depth = 1;
  Tree t = fit_tree(d, bernstein_spec(d, 4), ctrl);
  REQUIRE_FALSE(t.root->is_leaf());
  CHECK(t.root->split_var == "x1");
  CHECK(std::isnan(t.root->p_value));
}

TEST_CASE("pure noise produces no split at the default level") {
  Dataset d = signal_dataset(400, 9, 0.0);
  Tree t = fit_tree(d, bernstein_spec(d, 3), quick_ctrl());
  CHECK(t.root->is_leaf());
  CHECK(t.root->p_value >= 0.05);
}

TEST_CASE("categorical variables with too many levels are never candidates") {
  Rng rng(11);
  const Index n = 600;
  std::vector<std::string> levels;
  for (int k = 0; k < 12; ++k) levels.push_back("l" + std::to_string(k));
  Column g = categorical_column("g", levels, std::vector<double>(12, 1.0 / 12), n, rng);
  Vector y(n), w;
  for (Index i = 0; i < n; ++i)
    y[i] = (g.codes[static_cast<std::size_t>(i)] >= 6 ? 4.0 : 0.0) + rng.normal();
  Dataset d("y", y, {g}, w, "");

  TreeControl ctrl = quick_ctrl();
  ctrl.alpha = 1.0;  // even without the gate there is nothing to select
  Tree t = fit_tree(d, bernstein_spec(d, 3), ctrl);
  CHECK(t.root->is_leaf());
  CHECK(t.root->selected_var.empty());
}

TEST_CASE("weighted leaves inherit the parent model when a refit is impossible") {
  Rng rng(12);
  const Index n_small = 4, n_big = 200;
  const Index n = n_small + n_big;
  Vector y(n), w(n);
  std::vector<int> codes(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const bool small = i < n_small;
    codes[static_cast<std::size_t>(i)] = small ? 0 : 1;
    w[i] = small ? 30.0 : 1.0;  // weighted size clears min_leaf with 4 rows
    y[i] = (small ? 9.0 : 0.0) + rng.normal();
  }
  Column g;
  g.name = "g";
  g.type = ColumnType::Categorical;
  g.levels = {"tiny", "bulk"};
  g.codes = std::move(codes);
  Dataset d("y", y, {g}, w, "w");

  ModelSpec spec = bernstein_spec(d, 5);  // 6 parameters > 4 rows
  TreeControl ctrl = quick_ctrl();
  ctrl.min_split = 100.0;
  ctrl.min_leaf = 50.0;
  ctrl.max_depth = 1;
  Tree t = fit_tree(d, spec, ctrl);

  REQUIRE_FALSE(t.root->is_leaf());
  const TreeNode& tiny_leaf = route_profile(t, Profile{{"g", "tiny"}});
  CHECK(tiny_leaf.forced_leaf);
  CHECK(tiny_leaf.n_rows == 4);
  // The inherited model was fitted on the full parent node, not the 4 rows.
  CHECK(tiny_leaf.model->n_obs == n);
  const TreeNode& bulk_leaf = route_profile(t, Profile{{"g", "bulk"}});
  CHECK_FALSE(bulk_leaf.forced_leaf);
  CHECK(bulk_leaf.model->n_obs == n_big);
}

TEST_CASE("tree_loglik sums leaf-model likelihoods over routed rows") {
  Dataset d = signal_dataset(500, 13, 2.5);
  Tree t = fit_tree(d, bernstein_spec(d, 4), quick_ctrl());

  // On training data every leaf evaluates its own training rows, so the sum
  // equals the sum of leaf fit log-likelihoods.
  double leaf_sum = 0.0;
  walk(*t.root, [&](const TreeNode& n) {
    if (n.is_leaf()) leaf_sum += n.model->loglik;
  });
  CHECK(tree_loglik(t, d) == doctest::Approx(leaf_sum).epsilon(1e-9));

  // Splitting strictly improves the in-sample likelihood over the stump.
  TreeControl stump_ctrl = quick_ctrl();
  stump_ctrl.max_depth = 0;
  Tree stump = fit_tree(d, bernstein_spec(d, 4), stump_ctrl);
  CHECK(tree_loglik(t, d) > tree_loglik(stump, d));

  // New data from the same generator evaluates finitely.
  Dataset fresh = signal_dataset(200, 14, 2.5);
  CHECK(std::isfinite(tree_loglik(t, fresh)));
}

TEST_CASE("missing values are rejected before fitting") {
  Dataset d = signal_dataset(100, 15, 0.0);
  Vector y = d.response();
  y[3] = std::numeric_limits<double>::quiet_NaN();
  Dataset bad("y", y, d.covariates(), d.weights(), "w");
  CHECK_THROWS_AS(fit_tree(bad, bernstein_spec(d, 3), quick_ctrl()), DataError);
}

}  // TEST_SUITE
