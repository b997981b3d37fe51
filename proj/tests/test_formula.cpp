#include <doctest.h>

#include <string>
#include <variant>

#include "helpers.hpp"
#include "transmod/errors.hpp"
#include "transmod/formula.hpp"

using namespace transmod;
using testutil::categorical_column;
using testutil::numeric_column;

namespace {

std::size_t offset_of(const std::string& formula) {
  try {
    parse_formula(formula);
  } catch (const FormulaError& e) {
    return e.offset();
  }
  return 0;  // parsed unexpectedly
}

Dataset toy_dataset() {
  Rng rng(31);
  const Index n = 120;
  Vector y(n), age(n), x2(n), w;
  Column sex = categorical_column("sex", {"f", "m"}, {0.5, 0.5}, n, rng);
  Column g = categorical_column("g", {"lo", "mid", "hi"}, {0.4, 0.3, 0.3}, n, rng);
  for (Index i = 0; i < n; ++i) {
    age[i] = rng.uniform(18.0, 70.0);
    x2[i] = rng.uniform(0.0, 5.0);
    y[i] = 22.0 + 0.05 * age[i] + rng.normal();
  }
  return Dataset("y", y,
                 {sex, g, numeric_column("age", age), numeric_column("x2", x2)},
                 w, "");
}

}  // namespace

TEST_SUITE("formula") {

TEST_CASE("defaults: trafo order 5, logit link, no clauses") {
  FormulaAst ast = parse_formula("y ~ bernstein(5)");
  CHECK(ast.response == "y");
  CHECK(ast.trafo == FormulaAst::TrafoKind::Bernstein);
  CHECK(ast.order == 5);
  CHECK(ast.link == "logit");
  CHECK_FALSE(ast.has_varying);
  CHECK(ast.strata.empty());
  CHECK(ast.shifts.empty());
}

TEST_CASE("full grammar parses every clause") {
  FormulaAst ast = parse_formula(
      "bmi ~ bernstein(8) + varying(age) | strata(sex, smoking) "
      "+ shift(g + g:age + u*v) @ probit");
  CHECK(ast.response == "bmi");
  CHECK(ast.order == 8);
  CHECK(ast.has_varying);
  CHECK(ast.varying_var == "age");
  REQUIRE(ast.strata.size() == 2);
  CHECK(ast.strata[0] == "sex");
  CHECK(ast.strata[1] == "smoking");
  REQUIRE(ast.shifts.size() == 3);
  CHECK(ast.shifts[0].kind == ShiftTerm::Kind::Main);
  CHECK(ast.shifts[1].kind == ShiftTerm::Kind::Interaction);
  CHECK(ast.shifts[1].v1 == "g");
  CHECK(ast.shifts[1].v2 == "age");
  CHECK(ast.shifts[2].kind == ShiftTerm::Kind::Cross);
  CHECK(ast.link == "probit");
}

TEST_CASE("tensor and linear transformation terms") {
  FormulaAst t = parse_formula("y ~ tensor(bernstein(6), age, 3)");
  CHECK(t.trafo == FormulaAst::TrafoKind::Tensor);
  CHECK(t.order == 6);
  CHECK(t.tensor_var == "age");
  CHECK(t.tensor_order == 3);

  FormulaAst l = parse_formula("y ~ linear() @ probit");
  CHECK(l.trafo == FormulaAst::TrafoKind::Linear);
}

TEST_CASE("print then parse reproduces the AST") {
  const char* formulas[] = {
      "y ~ bernstein(5)",
      "y ~ linear() @ probit",
      "bmi ~ bernstein(8) + varying(age) | strata(sex, smoking) + shift(g:age) @ probit",
      "y ~ tensor(bernstein(4), x, 2) + shift(a + b*c)",
  };
  for (const char* f : formulas) {
    FormulaAst ast = parse_formula(f);
    const std::string printed = print_formula(ast);
    FormulaAst again = parse_formula(printed);
    CHECK(print_formula(again) == printed);
    CHECK(again.response == ast.response);
    CHECK(again.link == ast.link);
    CHECK(again.strata == ast.strata);
    CHECK(again.shifts.size() == ast.shifts.size());
  }
  // The canonical form always states the link.
  CHECK(print_formula(parse_formula("y ~ bernstein(5)")) == "y ~ bernstein(5) @ logit");
}

TEST_CASE("errors carry 1-based byte offsets") {
  CHECK(offset_of("bmi ~") == 6);                       // input ends after '~'
  CHECK(offset_of("~ bernstein(5)") == 1);              // missing response
  CHECK(offset_of("y ~ spline(3)") == 5);               // unknown trafo name
  CHECK(offset_of("y ~ bernstein(0)") == 15);           // order below 1
  CHECK(offset_of("y ~ bernstein(5) - 2") == 18);       // unexpected character
  CHECK(offset_of("y ~ linear() @ cloglog") == 16);     // unknown link
  CHECK(offset_of("y ~ bernstein(5) + wiggle(x)") == 20);  // unknown clause
  CHECK(offset_of("y ~ bernstein(5) | shift(x)") == 20);   // strata required after |
  CHECK(offset_of("y ~ bernstein(5) trailing") == 18);     // trailing input
}

TEST_CASE("duplicate and malformed clauses are rejected") {
  CHECK_THROWS_AS(parse_formula("y ~ bernstein(5) + varying(a) + varying(b)"),
                  FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ bernstein(5) + shift(a) + shift(b)"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ bernstein(5) | strata(a) | strata(b)"),
                  FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ bernstein(5) | strata(a, a)"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ bernstein(5) + shift()"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ bernstein(5.5)"), FormulaError);
  CHECK_THROWS_AS(parse_formula(""), FormulaError);
}

TEST_CASE("lowering builds data-driven supports with 10 percent padding") {
  Dataset d = toy_dataset();
  ModelSpec spec = lower("y ~ bernstein(5)", d);
  const auto& bb = std::get<BernsteinBasis>(spec.trafo.blocks()[0]);
  double lo = d.response().minCoeff(), hi = d.response().maxCoeff();
  const double r = hi - lo;
  CHECK(bb.support().lower == doctest::Approx(lo - 0.1 * r).epsilon(1e-12));
  CHECK(bb.support().upper == doctest::Approx(hi + 0.1 * r).epsilon(1e-12));
  CHECK(spec.formula == "y ~ bernstein(5) @ logit");
  CHECK(spec.link.kind == LinkKind::Logit);
}

TEST_CASE("lowering wires strata, shifts, and parameter counts") {
  Dataset d = toy_dataset();
  ModelSpec spec = lower("y ~ bernstein(4) | strata(sex) + shift(g + age)", d);
  CHECK(spec.n_cells() == 2);
  CHECK(spec.trafo_dim() == 5);
  CHECK(spec.shift_dim() == 3);  // g: 2 treatment columns, age: 1
  CHECK(spec.n_params() == 13);

  ModelSpec cross = lower("y ~ bernstein(4) + shift(sex*age)", d);
  CHECK(cross.shift_dim() == 3);  // sex main (1) + age main (1) + non-ref cell (1)
}

TEST_CASE("varying clause composes with the bernstein block") {
  Dataset d = toy_dataset();
  ModelSpec spec = lower("y ~ bernstein(3) + varying(x2)", d);
  CHECK(spec.trafo.blocks().size() == 2);
  CHECK(spec.trafo_dim() == 8);
  CHECK(std::holds_alternative<VaryingCoefBasis>(spec.trafo.blocks()[1]));
}

TEST_CASE("lowering validates the spec against the data") {
  Dataset d = toy_dataset();
  // response name mismatch
  CHECK_THROWS_AS(lower("z ~ bernstein(5)", d), SpecificationError);
  // shift term fully absorbed by strata
  CHECK_THROWS_AS(lower("y ~ bernstein(5) | strata(sex) + shift(sex)", d),
                  SpecificationError);
  CHECK_THROWS_AS(lower("y ~ bernstein(5) | strata(sex, g) + shift(sex:g)", d),
                  SpecificationError);
  // but a term mixing in a non-stratum variable stays identifiable
  CHECK_NOTHROW(lower("y ~ bernstein(5) | strata(sex) + shift(sex:age)", d));
  // tensor covariate must be numeric
  CHECK_THROWS_AS(lower("y ~ tensor(bernstein(4), sex, 2)", d), SpecificationError);
  // varying needs a bernstein trafo and a non-negative numeric variable
  CHECK_THROWS_AS(lower("y ~ linear() + varying(age)", d), SpecificationError);
  CHECK_THROWS_AS(lower("y ~ bernstein(3) + varying(sex)", d), SpecificationError);
  // strata variable must be categorical
  CHECK_THROWS_AS(lower("y ~ bernstein(5) | strata(age)", d), DataError);
  // unknown column surfaces as a data error
  CHECK_THROWS_AS(lower("y ~ bernstein(5) + shift(ghost)", d), DataError);
}

TEST_CASE("varying rejects negative covariate values") {
  Rng rng(7);
  const Index n = 50;
  Vector y(n), x(n), w;
  for (Index i = 0; i < n; ++i) {
    y[i] = rng.normal();
    x[i] = rng.uniform(-1.0, 1.0);
  }
  Dataset d("y", y, {numeric_column("x", x)}, w, "");
  CHECK_THROWS_AS(lower("y ~ bernstein(3) + varying(x)", d), SpecificationError);
}

TEST_CASE("constant columns cannot carry a basis support") {
  const Index n = 40;
  Vector y = Vector::Constant(n, 3.0), x(n), w;
  for (Index i = 0; i < n; ++i) x[i] = static_cast<double>(i);
  Dataset d("y", y, {numeric_column("x", x)}, w, "");
  CHECK_THROWS_AS(lower("y ~ bernstein(5)", d), SpecificationError);
}

}  // TEST_SUITE
