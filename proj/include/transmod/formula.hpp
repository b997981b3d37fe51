#pragma once

#include <string>
#include <vector>

#include "transmod/model.hpp"

namespace transmod {

// Parsed model formula:
//   response ~ trafo [+ varying(v)] [| strata(v1,v2) ] [+ shift(t1 + ...)] [@ link]
// with trafo one of linear(), bernstein(M), tensor(bernstein(M), var, M).
struct FormulaAst {
  enum class TrafoKind { Linear, Bernstein, Tensor };

  std::string response;
  TrafoKind trafo = TrafoKind::Bernstein;
  int order = 5;
  std::string tensor_var;
  int tensor_order = 5;
  bool has_varying = false;
  std::string varying_var;
  std::vector<std::string> strata;
  std::vector<ShiftTerm> shifts;
  std::string link = "logit";
};

// Errors carry 1-based byte offsets into the formula text.
FormulaAst parse_formula(const std::string& text);

// Canonical text form; parse(print(ast)) reproduces the AST.
std::string print_formula(const FormulaAst& ast);

// Binds the AST to a dataset: builds bases over data-driven supports
// ([min - 0.1 range, max + 0.1 range]), the stratum index, and the shift
// design, and validates types and identifiability of the combination.
ModelSpec lower(const FormulaAst& ast, const Dataset& d);

ModelSpec lower(const std::string& formula, const Dataset& d);

}  // namespace transmod
