#include "transmod/serialize.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <variant>

#include "transmod/errors.hpp"
#include "transmod/hash.hpp"
#include "transmod/text.hpp"

namespace transmod {

namespace {

Json json_vector(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json json_matrix(const Matrix& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Json support_json(const Support& s) {
  return Json{{"lower", s.lower}, {"upper", s.upper}};
}

Json block_json(const BasisBlock& block) {
  Json out = Json::object();
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, LinearBasis>) {
          out["kind"] = "linear";
          out["support"] = support_json(b.support());
        } else if constexpr (std::is_same_v<T, BernsteinBasis>) {
          out["kind"] = "bernstein";
          out["order"] = b.order();
          out["support"] = support_json(b.support());
        } else if constexpr (std::is_same_v<T, TensorBasis>) {
          out["kind"] = "tensor";
          out["order"] = b.response_basis().order();
          out["support"] = support_json(b.response_basis().support());
          out["covariate"] = b.covariate();
          out["covariate_order"] = b.covariate_basis().order();
          out["covariate_support"] = support_json(b.covariate_basis().support());
        } else {
          out["kind"] = "varying";
          out["order"] = b.response_basis().order();
          out["support"] = support_json(b.response_basis().support());
          out["covariate"] = b.covariate();
        }
      },
      block);
  return out;
}

Json spec_json(const ModelSpec& spec) {
  Json out = Json::object();
  out["formula"] = spec.formula;
  out["link"] = spec.link.name();
  out["response"] = spec.response;
  Json blocks = Json::array();
  for (const BasisBlock& b : spec.trafo.blocks()) blocks.push_back(block_json(b));
  out["trafo"] = std::move(blocks);
  out["strata"] = Json{{"variables", spec.strata.vars},
                       {"cells", spec.strata.cells},
                       {"labels", spec.strata.labels}};
  Json shift_cols = Json::array();
  for (const auto& c : spec.shifts.cols) shift_cols.push_back(c.label);
  out["shift"] = std::move(shift_cols);
  out["n_params"] = spec.n_params();
  return out;
}

Json node_json(const TreeNode& n) {
  Json out = Json::object();
  out["id"] = n.id;
  out["n"] = n.n_rows;
  out["weighted_n"] = n.weighted_n;
  if (!n.selected_var.empty()) out["selected"] = n.selected_var;
  out["p_value"] = n.p_value;  // NaN serializes as null
  if (n.is_leaf()) {
    out["leaf"] = true;
    if (n.forced_leaf) out["forced"] = true;
    out["theta"] = json_vector(n.model->theta);
    out["loglik"] = n.model->loglik;
  } else {
    out["split"] = Json{{"variable", n.split_var},
                        {"numeric", n.split_is_numeric}};
    if (n.split_is_numeric) {
      out["split"]["cutpoint"] = n.cutpoint;
    } else {
      out["split"]["left_levels"] = n.left_levels;
      out["split"]["right_levels"] = n.right_levels;
    }
    out["left"] = node_json(*n.left);
    out["right"] = node_json(*n.right);
  }
  return out;
}

Json tree_control_json(const TreeControl& c) {
  return Json{{"alpha", c.alpha},
              {"min_split", c.min_split},
              {"min_leaf", c.min_leaf},
              {"max_depth", c.max_depth},
              {"n_perm", c.n_perm},
              {"seed", c.seed},
              {"mtry", c.mtry}};
}

}  // namespace

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::uint64_t state = kFnvOffset;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    state = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), state);
    if (!in) break;
  }
  return state;
}

std::string iso8601_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    long parsed = 0;
    if (parse_long(epoch, parsed)) t = static_cast<std::time_t>(parsed);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest make_manifest(const std::string& command, const std::string& formula,
                          const std::string& data_path, Json options,
                          std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.formula = formula;
  m.data_path = data_path;
  if (!data_path.empty()) m.data_hash = to_hex(hash_file(data_path));
  m.options = std::move(options);
  m.seed = seed;
  m.timestamp = iso8601_timestamp();
  return m;
}

Json manifest_json(const RunManifest& m) {
  Json out = Json::object();
  out["command"] = m.command;
  out["formula"] = m.formula;
  out["data"] = Json{{"path", m.data_path}, {"fnv1a64", m.data_hash}};
  out["options"] = m.options;
  out["seed"] = m.seed;
  out["version"] = m.version;
  out["timestamp"] = m.timestamp;
  return out;
}

std::string manifest_comment(const RunManifest& m) {
  return "# " + manifest_json(m).dump();
}

Json model_json(const FittedModel& fm) {
  Json out = Json::object();
  out["schema"] = "transmod/model/1";
  out["model"] = spec_json(fm.spec);
  out["n_obs"] = fm.n_obs;
  out["weight_sum"] = fm.weight_sum;
  out["data_fnv1a64"] = to_hex(fm.data_hash);
  out["loglik"] = fm.loglik;
  out["convergence"] = Json{{"iterations", fm.report.iterations},
                            {"grad_norm", fm.report.grad_norm},
                            {"converged", fm.report.converged},
                            {"active_constraints", fm.report.active_constraints}};
  Json params = Json::array();
  for (std::size_t i = 0; i < fm.param_names.size(); ++i) {
    params.push_back(Json{{"name", fm.param_names[i]},
                          {"estimate", fm.theta[static_cast<Index>(i)]}});
  }
  out["params"] = std::move(params);
  out["vcov"] = json_matrix(fm.vcov);
  return out;
}

Json tree_json(const Tree& t) {
  Json out = Json::object();
  out["schema"] = "transmod/tree/1";
  out["model"] = spec_json(t.spec);
  out["control"] = tree_control_json(t.ctrl);
  out["n_leaves"] = t.n_leaves();
  out["depth"] = t.depth();
  out["root"] = node_json(*t.root);
  return out;
}

Json forest_json(const TransformationForest& f) {
  Json out = Json::object();
  out["schema"] = "transmod/forest/1";
  out["model"] = spec_json(f.spec);
  out["control"] = Json{{"n_trees", f.ctrl.n_trees},
                        {"fraction", f.ctrl.fraction},
                        {"mtry", f.ctrl.mtry},
                        {"seed", f.ctrl.seed},
                        {"tree", tree_control_json(f.ctrl.tree)}};
  out["n_train"] = f.n_train;
  Json trees = Json::array();
  for (std::size_t b = 0; b < f.trees.size(); ++b) {
    Json tj = Json::object();
    tj["index"] = b;
    tj["subsample"] = f.subsamples[b];
    tj["n_leaves"] = f.trees[b].n_leaves();
    tj["root"] = node_json(*f.trees[b].root);
    trees.push_back(std::move(tj));
  }
  out["trees"] = std::move(trees);
  return out;
}

void write_json_file(const Json& payload, const RunManifest& m,
                     const std::string& path) {
  Json doc = Json::object();
  doc["manifest"] = manifest_json(m);
  for (const auto& [key, value] : payload.items()) doc[key] = value;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

}  // namespace transmod
