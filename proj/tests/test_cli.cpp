#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

// Drives the installed executable end to end: argument handling, exit codes,
// artifact layout, and byte-level reproducibility of reruns.

#ifndef TRANSMOD_BIN
#error "TRANSMOD_BIN must name the CLI executable"
#endif

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot read ", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh working directory per scenario under the test runner's cwd.
fs::path scratch(const std::string& name) {
  fs::path dir = fs::path("cli_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const std::string out_file = (dir / "stdout.log").string();
  const std::string err_file = (dir / "stderr.log").string();
  const std::string cmd =
      std::string(TRANSMOD_BIN) + " " + args + " >" + out_file + " 2>" + err_file;
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

// Simulated survey data shared by the model-fitting scenarios.
std::string make_data(const fs::path& dir, int n, int seed) {
  RunResult r = run_cli("simulate --n " + std::to_string(n) + " --seed " +
                            std::to_string(seed) + " --out " + (dir / "sim").string(),
                        dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  return (dir / "sim" / "data.csv").string();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

// Whitespace-tokenized row of the summary's interval table.
std::vector<std::string> summary_row(const std::string& summary, const std::string& name) {
  for (const std::string& line : lines_of(summary)) {
    if (line.rfind(name, 0) != 0) continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string t;
    while (ss >> t) tok.push_back(t);
    return tok;
  }
  return {};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help succeeds and parse failures exit with code 2") {
  fs::path dir = scratch("args");
  CHECK(run_cli("--help", dir).code == 0);
  CHECK(run_cli("fit --help", dir).code == 0);
  CHECK(run_cli("", dir).code == 2);          // a subcommand is required
  CHECK(run_cli("polish", dir).code == 2);    // unknown subcommand
  CHECK(run_cli("fit --formula \"y ~ linear()\"", dir).code == 2);  // --data missing
  CHECK(run_cli("fit --data x.csv", dir).code == 2);                // --formula missing
}

TEST_CASE("simulate writes a manifest-led reproducible dataset") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  fs::path dir = scratch("simulate");
  RunResult r = run_cli("simulate --n 120 --seed 9 --out " + (dir / "a").string(), dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out == "wrote " + (dir / "a" / "data.csv").string() + "\n");

  const std::string text = slurp((dir / "a" / "data.csv").string());
  std::vector<std::string> lines = lines_of(text);
  REQUIRE(lines.size() == 122);  // manifest comment, header, one line per row
  CHECK(lines[0].rfind("# {\"command\":\"simulate\"", 0) == 0);
  CHECK(lines[1] == "sex,smoking,age,alcohol,fv,activity,edu,nat,region,weights,bmi");

  REQUIRE(run_cli("simulate --n 120 --seed 9 --out " + (dir / "b").string(), dir).code == 0);
  CHECK(slurp((dir / "b" / "data.csv").string()) == text);
  REQUIRE(run_cli("simulate --n 120 --seed 10 --out " + (dir / "c").string(), dir).code ==
          0);
  CHECK(slurp((dir / "c" / "data.csv").string()) != text);
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("simulate validation failures exit with code 2") {
  fs::path dir = scratch("simbad");
  RunResult r = run_cli("simulate --n 0 --out " + dir.string(), dir);
  CHECK(r.code == 2);
  CHECK(r.err.rfind("transmod: error:", 0) == 0);
  CHECK(run_cli("simulate --n 50 --effect-scale -0.5 --out " + dir.string(), dir).code ==
        2);
}

TEST_CASE("fit writes parameters, summary, and odds ratios") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  fs::path dir = scratch("fit");
  const std::string data = make_data(dir, 300, 7);

  RunResult r = run_cli("fit --data " + data +
                            " --formula \"bmi ~ bernstein(4) + shift(sex + age) @ logit\""
                            " --weights weights --seed 5 --out " +
                            (dir / "out").string(),
                        dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::vector<std::string> wrote = lines_of(r.out);
  REQUIRE(wrote.size() == 2);
  CHECK(wrote[0] == "wrote " + (dir / "out" / "params.json").string());
  CHECK(wrote[1] == "wrote " + (dir / "out" / "summary.txt").string());

  Json doc = Json::parse(slurp((dir / "out" / "params.json").string()));
  CHECK(doc.items().begin().key() == "manifest");
  CHECK(doc["manifest"]["command"] == "fit");
  CHECK(doc["manifest"]["options"]["weights"] == "weights");
  CHECK(doc["manifest"]["options"]["level"].get<double>() == 0.95);
  CHECK(doc["manifest"]["seed"] == 5);
  CHECK(doc["manifest"]["data"]["fnv1a64"].get<std::string>().size() == 16);
  CHECK(doc["schema"] == "transmod/model/1");
  CHECK(doc["convergence"]["converged"] == true);

  const std::string summary = slurp((dir / "out" / "summary.txt").string());
  CHECK(summary.find("formula: bmi ~ bernstein(4) + shift(sex + age) @ logit\n") !=
        std::string::npos);
  CHECK(summary.find("converged: yes") != std::string::npos);
  CHECK(summary.find("parameter") != std::string::npos);
  CHECK(summary.find("beta[sex=male]") != std::string::npos);
  CHECK(summary.find("odds ratios (95% confidence):") != std::string::npos);
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("fit reruns are byte-identical including the thread count") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  fs::path dir = scratch("rerun");
  const std::string data = make_data(dir, 250, 21);
  const std::string formula =
      " --formula \"bmi ~ bernstein(3) + shift(age) @ logit\" --weights weights";

  REQUIRE(run_cli("fit --data " + data + formula + " --out " + (dir / "r1").string(),
                  dir).code == 0);
  REQUIRE(run_cli("fit --data " + data + formula + " --threads 8 --out " +
                      (dir / "r2").string(),
                  dir).code == 0);
  CHECK(slurp((dir / "r1" / "params.json").string()) ==
        slurp((dir / "r2" / "params.json").string()));
  CHECK(slurp((dir / "r1" / "summary.txt").string()) ==
        slurp((dir / "r2" / "summary.txt").string()));
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("confidence level controls the interval width") {
  fs::path dir = scratch("level");
  const std::string data = make_data(dir, 250, 13);
  const std::string formula = " --formula \"bmi ~ bernstein(3) + shift(age) @ logit\"";

  REQUIRE(run_cli("fit --data " + data + formula + " --level 0.5 --out " +
                      (dir / "narrow").string(),
                  dir).code == 0);
  REQUIRE(run_cli("fit --data " + data + formula + " --out " + (dir / "wide").string(),
                  dir).code == 0);

  const std::string narrow = slurp((dir / "narrow" / "summary.txt").string());
  const std::string wide = slurp((dir / "wide" / "summary.txt").string());
  CHECK(narrow.find("25.0%") != std::string::npos);
  CHECK(narrow.find("75.0%") != std::string::npos);
  std::vector<std::string> row50 = summary_row(narrow, "beta[age]");
  std::vector<std::string> row95 = summary_row(wide, "beta[age]");
  REQUIRE(row50.size() == 5);
  REQUIRE(row95.size() == 5);
  CHECK(row50[1] == row95[1]);  // the estimate does not depend on the level
  CHECK(std::stod(row50[4]) - std::stod(row50[3]) <
        std::stod(row95[4]) - std::stod(row95[3]));
}

TEST_CASE("fit overlays empirical and model distribution curves") {
  fs::path dir = scratch("overlay");
  const std::string data = make_data(dir, 300, 17);

  RunResult r = run_cli("fit --data " + data +
                            " --formula \"bmi ~ bernstein(4) | strata(sex) @ logit\""
                            " --overlay strata=sex --out " +
                            (dir / "out").string(),
                        dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  REQUIRE(lines_of(r.out).size() == 3);
  CHECK(lines_of(r.out)[2] == "wrote " + (dir / "out" / "curves.csv").string());

  const std::string summary = slurp((dir / "out" / "summary.txt").string());
  CHECK(summary.find("ecdf overlay sup-distance:") != std::string::npos);
  CHECK(summary.find("sex=female") != std::string::npos);
  std::vector<std::string> curves = lines_of(slurp((dir / "out" / "curves.csv").string()));
  REQUIRE(curves.size() > 2);
  CHECK(curves[1] == "profile,functional,grid,value");

  CHECK(run_cli("fit --data " + data +
                    " --formula \"bmi ~ bernstein(4) | strata(sex) @ logit\""
                    " --overlay sex --out " +
                    (dir / "bad").string(),
                dir).code == 2);  // the option value must start with 'strata='
}

TEST_CASE("fit rejects bad requests with exit code 2") {
  fs::path dir = scratch("fitbad");
  const std::string data = make_data(dir, 120, 3);
  const std::string out = " --out " + (dir / "out").string();

  CHECK(run_cli("fit --data " + data + " --formula \"bmi ~ bernstein(4)\" --level 1.5" +
                    out,
                dir).code == 2);
  CHECK(run_cli("fit --data " + data + " --formula \"bmi ~ bernstein(4\"" + out, dir)
            .code == 2);
  CHECK(run_cli("fit --data " + data +
                    " --formula \"bmi ~ bernstein(4) + shift(ghost)\"" + out,
                dir).code == 2);
  CHECK(run_cli("fit --data " + (dir / "missing.csv").string() +
                    " --formula \"bmi ~ bernstein(4)\"" + out,
                dir).code == 2);
}

TEST_CASE("unexpected failures exit with code 3") {
  fs::path dir = scratch("blocked");
  std::ofstream((dir / "blocker").string()) << "";
  RunResult r =
      run_cli("simulate --n 20 --out " + (dir / "blocker" / "sub").string(), dir);
  CHECK(r.code == 3);
  CHECK(r.err.rfind("transmod: error:", 0) == 0);
}

TEST_CASE("tree writes model and importance artifacts") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  fs::path dir = scratch("tree");
  const std::string data = make_data(dir, 400, 7);

  RunResult r = run_cli("tree --data " + data +
                            " --formula \"bmi ~ bernstein(3) @ logit\" --weights weights"
                            " --alpha 0.05 --perms 199 --min-split 100 --min-leaf 40"
                            " --seed 2 --pdp vars=age --out " +
                            (dir / "out").string(),
                        dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  REQUIRE(lines_of(r.out).size() == 3);

  Json doc = Json::parse(slurp((dir / "out" / "model.json").string()));
  CHECK(doc["manifest"]["command"] == "tree");
  CHECK(doc["manifest"]["options"]["perms"] == 199);
  CHECK(doc["schema"] == "transmod/tree/1");
  CHECK(doc["control"]["alpha"].get<double>() == 0.05);
  CHECK(doc["loglik"].is_number());
  CHECK(doc["root"]["n"] == 400);

  std::vector<std::string> imp = lines_of(slurp((dir / "out" / "importance.csv").string()));
  REQUIRE(imp.size() == 11);  // comment, header, nine covariates
  CHECK(imp[1] == "variable,importance");
  CHECK(imp[2].rfind("sex,", 0) == 0);

  std::vector<std::string> pdp = lines_of(slurp((dir / "out" / "pdp.csv").string()));
  REQUIRE(pdp.size() > 2);
  CHECK(pdp[1] == "profile,functional,grid,value");
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("forest writes model and importance artifacts") {
  fs::path dir = scratch("forest");
  const std::string data = make_data(dir, 300, 11);
  const std::string formula =
      " --formula \"bmi ~ bernstein(3) @ logit\" --weights weights";

  RunResult r = run_cli("forest --data " + data + formula +
                            " --trees 4 --mtry 2 --seed 4 --out " + (dir / "out").string(),
                        dir);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  Json doc = Json::parse(slurp((dir / "out" / "model.json").string()));
  CHECK(doc["manifest"]["command"] == "forest");
  CHECK(doc["manifest"]["options"]["trees"] == 4);
  CHECK(doc["manifest"]["options"]["mtry"] == 2);
  CHECK(doc["schema"] == "transmod/forest/1");
  REQUIRE(doc["trees"].size() == 4);
  CHECK(doc["loglik"].is_number());
  CHECK(lines_of(slurp((dir / "out" / "importance.csv").string())).size() == 11);

  RunResult all = run_cli("forest --data " + data + formula +
                              " --trees 2 --mtry all --out " + (dir / "all").string(),
                          dir);
  REQUIRE_MESSAGE(all.code == 0, all.err);
  Json doc_all = Json::parse(slurp((dir / "all" / "model.json").string()));
  CHECK(doc_all["manifest"]["options"]["mtry"] == "all");

  CHECK(run_cli("forest --data " + data + formula + " --trees 2 --mtry bogus --out " +
                    (dir / "bad").string(),
                dir).code == 2);
}

}  // TEST_SUITE
