#include "transmod/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "transmod/data.hpp"
#include "transmod/errors.hpp"
#include "transmod/fit.hpp"
#include "transmod/forest.hpp"
#include "transmod/formula.hpp"
#include "transmod/parallel.hpp"
#include "transmod/predict.hpp"
#include "transmod/serialize.hpp"
#include "transmod/simulate.hpp"
#include "transmod/text.hpp"
#include "transmod/tree.hpp"

namespace transmod {

namespace {

std::vector<std::string> ast_covariates(const FormulaAst& ast) {
  std::vector<std::string> vars;
  auto add = [&](const std::string& v) {
    if (!v.empty() && std::find(vars.begin(), vars.end(), v) == vars.end())
      vars.push_back(v);
  };
  if (ast.trafo == FormulaAst::TrafoKind::Tensor) add(ast.tensor_var);
  if (ast.has_varying) add(ast.varying_var);
  for (const std::string& v : ast.strata) add(v);
  for (const ShiftTerm& t : ast.shifts) {
    add(t.v1);
    if (t.kind != ShiftTerm::Kind::Main) add(t.v2);
  }
  return vars;
}

// Trees and forests may split on any column, so completeness is required
// everywhere; plain fits only need the variables the formula names.
Dataset load_complete(const CommonOptions& common, const std::string& response,
                      const std::vector<std::string>* model_vars) {
  if (common.data.empty()) throw ArgumentError("--data is required");
  Dataset raw = load_csv(common.data, response, common.weight_column);
  std::vector<std::string> vars;
  if (model_vars) {
    vars = *model_vars;
  } else {
    for (const Column& c : raw.covariates()) vars.push_back(c.name);
  }
  auto [d, dropped] = drop_missing(raw, vars);
  if (dropped > 0)
    std::cerr << "transmod: dropped " << dropped << " rows with missing values\n";
  return d;
}

std::string out_path(const std::string& dir, const std::string& name) {
  namespace fs = std::filesystem;
  if (!dir.empty()) fs::create_directories(dir);
  return (fs::path(dir.empty() ? "." : dir) / name).string();
}

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

void write_summary(const FittedModel& fm, const FitCommand& cmd, const RunManifest& m,
                   const OverlayResult* overlay, const std::string& path) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw DataError("cannot write '" + path + "'");

  outf << manifest_comment(m) << "\n";
  outf << "formula: " << fm.spec.formula << "\n";
  outf << "observations: " << fm.n_obs << " (total weight "
       << format_double(fm.weight_sum) << ")\n";
  outf << "parameters: " << fm.spec.n_params() << "\n";
  outf << "log-likelihood: " << format_fixed(fm.loglik, 6) << "\n";
  outf << "converged: " << (fm.report.converged ? "yes" : "no") << " ("
       << fm.report.iterations << " iterations, max|grad|/n "
       << format_double(fm.report.grad_norm) << ")\n";
  if (!fm.report.active_constraints.empty())
    outf << "active monotonicity constraints: " << fm.report.active_constraints.size()
         << "\n";
  outf << "\n";

  const std::vector<IntervalRow> rows = confint(fm, cmd.level);
  const double lo_pct = 100.0 * (1.0 - cmd.level) / 2.0;
  std::size_t name_w = 9;
  for (const IntervalRow& r : rows) name_w = std::max(name_w, r.name.size());
  const std::size_t col = 14;

  outf << pad_right("parameter", name_w) << pad_left("estimate", col)
       << pad_left("se", col) << pad_left(format_fixed(lo_pct, 1) + "%", col)
       << pad_left(format_fixed(100.0 - lo_pct, 1) + "%", col) << "\n";
  bool any_boundary = false;
  for (const IntervalRow& r : rows) {
    outf << pad_right(r.name, name_w) << pad_left(format_fixed(r.estimate, 6), col)
         << pad_left(format_fixed(r.se, 6), col)
         << pad_left(format_fixed(r.lower, 6), col)
         << pad_left(format_fixed(r.upper, 6), col);
    if (r.boundary) {
      outf << "  *";
      any_boundary = true;
    }
    outf << "\n";
  }
  if (any_boundary)
    outf << "* at a monotonicity boundary; the Wald interval is unreliable\n";

  if (fm.spec.link.name() == "logit") {
    bool any_shift = false;
    for (const IntervalRow& r : rows) any_shift = any_shift || r.shift_param;
    if (any_shift) {
      outf << "\nodds ratios (" << format_fixed(100.0 * cmd.level, 0)
           << "% confidence):\n";
      for (const IntervalRow& r : rows)
        if (r.shift_param)
          outf << pad_right(r.name, name_w) << "  "
               << format_or(r.estimate, r.se, cmd.level) << "\n";
    }
  }

  if (overlay) {
    outf << "\necdf overlay sup-distance:\n";
    for (const auto& [label, dist] : overlay->sup_distance)
      outf << pad_right(label.empty() ? "(all)" : label, name_w) << "  "
           << format_fixed(dist, 6) << "\n";
    for (const std::string& w : overlay->warnings) outf << "warning: " << w << "\n";
  }

  if (!outf) throw DataError("failed writing '" + path + "'");
}

void write_importance_csv(const ImportanceResult& imp, const std::string& path,
                          const std::string& comment) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw DataError("cannot write '" + path + "'");
  outf << comment << "\n";
  outf << "variable,importance\n";
  for (std::size_t i = 0; i < imp.vars.size(); ++i)
    outf << imp.vars[i] << ","
         << format_double(imp.importance[static_cast<Index>(i)]) << "\n";
  if (!outf) throw DataError("failed writing '" + path + "'");
}

Json common_options_json(const CommonOptions& common) {
  Json options = Json::object();
  if (!common.weight_column.empty()) options["weights"] = common.weight_column;
  return options;
}

}  // namespace

std::vector<std::string> parse_var_list(const std::string& text, const std::string& prefix) {
  const std::string head = prefix + "=";
  if (text.rfind(head, 0) != 0)
    throw ArgumentError("expected '" + head + "v1,v2,...', got '" + text + "'");
  std::vector<std::string> vars;
  std::size_t pos = head.size();
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::size_t end = comma == std::string::npos ? text.size() : comma;
    if (end == pos) throw ArgumentError("empty variable name in '" + text + "'");
    vars.push_back(text.substr(pos, end - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (vars.empty()) throw ArgumentError("no variables named in '" + text + "'");
  return vars;
}

void cmd_fit(const FitCommand& cmd) {
  set_max_threads(cmd.common.threads);
  if (cmd.common.formula.empty()) throw ArgumentError("--formula is required");
  if (!(cmd.level > 0.0 && cmd.level < 1.0))
    throw ArgumentError("--level must be strictly between 0 and 1");

  const FormulaAst ast = parse_formula(cmd.common.formula);
  const std::vector<std::string> vars = ast_covariates(ast);
  const Dataset d = load_complete(cmd.common, ast.response, &vars);
  const ModelSpec spec = lower(ast, d);
  const FittedModel fm = mle(spec, d);

  Json options = common_options_json(cmd.common);
  options["level"] = cmd.level;
  if (!cmd.overlay.empty()) options["overlay"] = cmd.overlay;
  const RunManifest m =
      make_manifest("fit", cmd.common.formula, cmd.common.data, options, cmd.common.seed);

  const std::string params_path = out_path(cmd.common.out, "params.json");
  write_json_file(model_json(fm), m, params_path);

  OverlayResult overlay;
  std::string curves_path;
  if (!cmd.overlay.empty()) {
    overlay = ecdf_overlay(fm, d, cmd.overlay);
    curves_path = out_path(cmd.common.out, "curves.csv");
    write_curve_csv(overlay.table, curves_path, manifest_comment(m));
  }

  const std::string summary_path = out_path(cmd.common.out, "summary.txt");
  write_summary(fm, cmd, m, cmd.overlay.empty() ? nullptr : &overlay, summary_path);

  std::cout << "wrote " << params_path << "\n";
  std::cout << "wrote " << summary_path << "\n";
  if (!curves_path.empty()) std::cout << "wrote " << curves_path << "\n";
}

void cmd_tree(const TreeCommand& cmd) {
  set_max_threads(cmd.common.threads);
  if (cmd.common.formula.empty()) throw ArgumentError("--formula is required");

  const FormulaAst ast = parse_formula(cmd.common.formula);
  const Dataset d = load_complete(cmd.common, ast.response, nullptr);
  const ModelSpec spec = lower(ast, d);

  TreeControl tree_ctrl;
  tree_ctrl.alpha = cmd.alpha;
  tree_ctrl.min_split = cmd.min_split;
  tree_ctrl.min_leaf = cmd.min_leaf;
  tree_ctrl.max_depth = cmd.max_depth;
  tree_ctrl.n_perm = cmd.n_perm;
  tree_ctrl.seed = cmd.common.seed;

  // Single-tree full-sample all-variable forest: its tree is the directly
  // fitted one, and the wrapper provides importance and partial dependence.
  ForestControl fc;
  fc.n_trees = 1;
  fc.fraction = 1.0;
  fc.mtry = static_cast<Index>(d.covariates().size());
  fc.seed = cmd.common.seed;
  fc.tree = tree_ctrl;
  const TransformationForest f = fit_forest(d, spec, fc);
  const Tree& t = f.trees[0];

  Json options = common_options_json(cmd.common);
  options["alpha"] = cmd.alpha;
  options["min_split"] = cmd.min_split;
  options["min_leaf"] = cmd.min_leaf;
  options["max_depth"] = cmd.max_depth;
  options["perms"] = cmd.n_perm;
  if (!cmd.pdp.empty()) options["pdp"] = cmd.pdp;
  const RunManifest m =
      make_manifest("tree", cmd.common.formula, cmd.common.data, options, cmd.common.seed);

  Json payload = tree_json(t);
  payload["loglik"] = tree_loglik(t, d);
  const std::string model_path = out_path(cmd.common.out, "model.json");
  write_json_file(payload, m, model_path);

  const ImportanceResult imp = var_importance(f, d);
  const std::string imp_path = out_path(cmd.common.out, "importance.csv");
  write_importance_csv(imp, imp_path, manifest_comment(m));

  std::cout << "wrote " << model_path << "\n";
  std::cout << "wrote " << imp_path << "\n";
  if (!cmd.pdp.empty()) {
    const CurveTable table = partial_dependence(f, d, cmd.pdp);
    const std::string pdp_path = out_path(cmd.common.out, "pdp.csv");
    write_curve_csv(table, pdp_path, manifest_comment(m));
    std::cout << "wrote " << pdp_path << "\n";
  }
}

void cmd_forest(const ForestCommand& cmd) {
  set_max_threads(cmd.common.threads);
  if (cmd.common.formula.empty()) throw ArgumentError("--formula is required");

  const FormulaAst ast = parse_formula(cmd.common.formula);
  const Dataset d = load_complete(cmd.common, ast.response, nullptr);
  const ModelSpec spec = lower(ast, d);

  ForestControl fc;
  fc.n_trees = cmd.n_trees;
  fc.fraction = cmd.fraction;
  fc.mtry = cmd.mtry_all ? static_cast<Index>(d.covariates().size()) : cmd.mtry;
  fc.seed = cmd.common.seed;
  const TransformationForest f = fit_forest(d, spec, fc);

  Json options = common_options_json(cmd.common);
  options["trees"] = cmd.n_trees;
  options["fraction"] = cmd.fraction;
  options["mtry"] = cmd.mtry_all ? Json("all") : Json(cmd.mtry);
  if (!cmd.pdp.empty()) options["pdp"] = cmd.pdp;
  const RunManifest m = make_manifest("forest", cmd.common.formula, cmd.common.data,
                                      options, cmd.common.seed);

  Json payload = forest_json(f);
  payload["loglik"] = forest_loglik(f, d);
  const std::string model_path = out_path(cmd.common.out, "model.json");
  write_json_file(payload, m, model_path);

  const ImportanceResult imp = var_importance(f, d);
  const std::string imp_path = out_path(cmd.common.out, "importance.csv");
  write_importance_csv(imp, imp_path, manifest_comment(m));

  std::cout << "wrote " << model_path << "\n";
  std::cout << "wrote " << imp_path << "\n";
  if (!cmd.pdp.empty()) {
    const CurveTable table = partial_dependence(f, d, cmd.pdp);
    const std::string pdp_path = out_path(cmd.common.out, "pdp.csv");
    write_curve_csv(table, pdp_path, manifest_comment(m));
    std::cout << "wrote " << pdp_path << "\n";
  }
}

void cmd_simulate(const SimulateCommand& cmd) {
  SimulateOptions o;
  o.n = cmd.n;
  o.seed = cmd.seed;
  o.effect_scale = cmd.effect_scale;
  o.random_weights = cmd.random_weights;
  const Dataset d = simulate_shs(o);

  Json options = Json::object();
  options["n"] = cmd.n;
  options["effect_scale"] = cmd.effect_scale;
  options["random_weights"] = cmd.random_weights;
  const RunManifest m = make_manifest("simulate", "", "", options, cmd.seed);

  const std::string path = out_path(cmd.out, "data.csv");
  write_csv(d, path, manifest_comment(m));
  std::cout << "wrote " << path << "\n";
}

}  // namespace transmod
