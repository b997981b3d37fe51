#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "transmod/commands.hpp"
#include "transmod/errors.hpp"
#include "transmod/text.hpp"

namespace {

void add_common(CLI::App* sub, transmod::CommonOptions& c) {
  sub->add_option("--data", c.data, "input CSV file")->required();
  sub->add_option("--formula", c.formula, "model formula")->required();
  sub->add_option("--weights", c.weight_column, "sampling-weight column");
  sub->add_option("--out", c.out, "output directory (default: .)");
  sub->add_option("--seed", c.seed, "random seed (default: 1)");
  sub->add_option("--threads", c.threads, "worker thread cap (default: 1)")
      ->envname("TRANSMOD_THREADS");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditional transformation models: fit, tree, forest, simulate"};
  app.require_subcommand(1);

  transmod::FitCommand fit_cmd;
  transmod::TreeCommand tree_cmd;
  transmod::ForestCommand forest_cmd;
  transmod::SimulateCommand sim_cmd;
  std::string overlay_spec;
  std::string tree_pdp_spec;
  std::string forest_pdp_spec;
  std::string mtry_spec;

  CLI::App* fit = app.add_subcommand("fit", "fit a transformation model");
  add_common(fit, fit_cmd.common);
  fit->add_option("--level", fit_cmd.level, "confidence level (default: 0.95)");
  fit->add_option("--overlay", overlay_spec,
                  "strata=v1,v2: empirical vs model CDF curves per cell");

  CLI::App* tree = app.add_subcommand("tree", "fit a transformation tree");
  add_common(tree, tree_cmd.common);
  tree->add_option("--alpha", tree_cmd.alpha, "split significance level (default: 0.05)");
  tree->add_option("--min-split", tree_cmd.min_split,
                   "weighted node size needed to test a split (default: 200)");
  tree->add_option("--min-leaf", tree_cmd.min_leaf,
                   "weighted size required on both sides (default: 70)");
  tree->add_option("--max-depth", tree_cmd.max_depth, "depth cap; negative: unbounded");
  tree->add_option("--perms", tree_cmd.n_perm, "permutations per node (default: 9999)");
  tree->add_option("--pdp", tree_pdp_spec, "vars=a,b: partial-dependence decile curves");

  CLI::App* forest = app.add_subcommand("forest", "fit a transformation forest");
  add_common(forest, forest_cmd.common);
  forest->add_option("--trees", forest_cmd.n_trees, "number of trees (default: 100)");
  forest->add_option("--fraction", forest_cmd.fraction,
                     "subsample share per tree (default: 0.632)");
  forest->add_option("--mtry", mtry_spec,
                     "candidate variables per node: integer, 'all', or 0 for sqrt rule");
  forest->add_option("--pdp", forest_pdp_spec, "vars=a,b: partial-dependence decile curves");

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic survey dataset");
  sim->add_option("--n", sim_cmd.n, "number of rows (default: 1000)");
  sim->add_option("--seed", sim_cmd.seed, "random seed (default: 1)");
  sim->add_option("--effect-scale", sim_cmd.effect_scale,
                  "covariate effect multiplier (default: 1)");
  sim->add_flag("--random-weights", sim_cmd.random_weights,
                "draw sampling weights from U(0.5, 2.5) instead of 1");
  sim->add_option("--out", sim_cmd.out, "output directory (default: .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit) {
      if (!overlay_spec.empty())
        fit_cmd.overlay = transmod::parse_var_list(overlay_spec, "strata");
      transmod::cmd_fit(fit_cmd);
    } else if (*tree) {
      if (!tree_pdp_spec.empty())
        tree_cmd.pdp = transmod::parse_var_list(tree_pdp_spec, "vars");
      transmod::cmd_tree(tree_cmd);
    } else if (*forest) {
      if (!forest_pdp_spec.empty())
        forest_cmd.pdp = transmod::parse_var_list(forest_pdp_spec, "vars");
      if (!mtry_spec.empty()) {
        if (mtry_spec == "all") {
          forest_cmd.mtry_all = true;
        } else {
          long v = 0;
          if (!transmod::parse_long(mtry_spec, v) || v < 0)
            throw transmod::ArgumentError(
                "--mtry expects a non-negative integer or 'all'");
          forest_cmd.mtry = static_cast<transmod::Index>(v);
        }
      }
      transmod::cmd_forest(forest_cmd);
    } else {
      transmod::cmd_simulate(sim_cmd);
    }
  } catch (const transmod::ArgumentError& e) {
    std::cerr << "transmod: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "transmod: error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
