#include "transmod/formula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "transmod/errors.hpp"

namespace transmod {

namespace {

enum class TokKind { Ident, Int, Symbol, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  long value = 0;
  std::size_t offset = 0;  // 1-based byte offset of the first character
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    tok_ = Token{};
    tok_.offset = pos_ + 1;
    if (pos_ >= text_.size()) {
      tok_.kind = TokKind::End;
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(
                                         text_[pos_])) ||
                                     text_[pos_] == '_' || text_[pos_] == '.')) {
        ++pos_;
      }
      tok_.kind = TokKind::Ident;
      tok_.text = text_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      tok_.kind = TokKind::Int;
      tok_.text = text_.substr(start, pos_ - start);
      tok_.value = std::stol(tok_.text);
      return;
    }
    static const std::string symbols = "~+|@(),:*";
    if (symbols.find(c) != std::string::npos) {
      tok_.kind = TokKind::Symbol;
      tok_.text = std::string(1, c);
      ++pos_;
      return;
    }
    throw FormulaError("unexpected character '" + std::string(1, c) + "'",
                       pos_ + 1);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  FormulaAst parse() {
    FormulaAst ast;
    ast.response = expect_ident("response variable");
    expect_symbol("~");
    parse_trafo(ast);
    while (is_symbol("+")) {
      lex_.take();
      parse_plus_clause(ast);
    }
    if (is_symbol("|")) {
      lex_.take();
      parse_strata(ast);
      while (is_symbol("+")) {
        lex_.take();
        parse_plus_clause(ast);
      }
    }
    if (is_symbol("@")) {
      lex_.take();
      Token t = lex_.peek();
      std::string name = expect_ident("link name");
      if (name != "probit" && name != "logit") {
        throw FormulaError("unknown link '" + name + "'", t.offset);
      }
      ast.link = name;
    }
    if (lex_.peek().kind != TokKind::End) {
      throw FormulaError("unexpected trailing input '" + lex_.peek().text + "'",
                         lex_.peek().offset);
    }
    return ast;
  }

 private:
  bool is_symbol(const char* s) const {
    return lex_.peek().kind == TokKind::Symbol && lex_.peek().text == s;
  }

  std::string expect_ident(const char* what) {
    Token t = lex_.peek();
    if (t.kind != TokKind::Ident) {
      throw FormulaError(std::string("expected ") + what, t.offset);
    }
    return lex_.take().text;
  }

  long expect_int(const char* what) {
    Token t = lex_.peek();
    if (t.kind != TokKind::Int) {
      throw FormulaError(std::string("expected ") + what, t.offset);
    }
    return lex_.take().value;
  }

  void expect_symbol(const char* s) {
    Token t = lex_.peek();
    if (t.kind != TokKind::Symbol || t.text != s) {
      throw FormulaError(std::string("expected '") + s + "'", t.offset);
    }
    lex_.take();
  }

  long parse_order() {
    Token t = lex_.peek();
    long m = expect_int("basis order");
    if (m < 1) throw FormulaError("basis order must be >= 1", t.offset);
    return m;
  }

  void parse_trafo(FormulaAst& ast) {
    Token t = lex_.peek();
    if (t.kind != TokKind::Ident) {
      throw FormulaError("expected transformation term", t.offset);
    }
    std::string name = lex_.take().text;
    if (name == "linear") {
      expect_symbol("(");
      expect_symbol(")");
      ast.trafo = FormulaAst::TrafoKind::Linear;
    } else if (name == "bernstein") {
      expect_symbol("(");
      ast.order = static_cast<int>(parse_order());
      expect_symbol(")");
      ast.trafo = FormulaAst::TrafoKind::Bernstein;
    } else if (name == "tensor") {
      expect_symbol("(");
      Token inner = lex_.peek();
      if (expect_ident("'bernstein'") != "bernstein") {
        throw FormulaError("tensor expects a bernstein response basis",
                           inner.offset);
      }
      expect_symbol("(");
      ast.order = static_cast<int>(parse_order());
      expect_symbol(")");
      expect_symbol(",");
      ast.tensor_var = expect_ident("tensor covariate");
      expect_symbol(",");
      ast.tensor_order = static_cast<int>(parse_order());
      expect_symbol(")");
      ast.trafo = FormulaAst::TrafoKind::Tensor;
    } else {
      throw FormulaError("unknown transformation term '" + name + "'",
                         t.offset);
    }
  }

  void parse_plus_clause(FormulaAst& ast) {
    Token t = lex_.peek();
    std::string name = expect_ident("'varying' or 'shift' clause");
    if (name == "varying") {
      if (ast.has_varying) {
        throw FormulaError("duplicate varying clause", t.offset);
      }
      expect_symbol("(");
      ast.varying_var = expect_ident("varying covariate");
      expect_symbol(")");
      ast.has_varying = true;
    } else if (name == "shift") {
      if (!ast.shifts.empty()) {
        throw FormulaError("duplicate shift clause", t.offset);
      }
      expect_symbol("(");
      ast.shifts.push_back(parse_shift_term());
      while (is_symbol("+")) {
        lex_.take();
        ast.shifts.push_back(parse_shift_term());
      }
      expect_symbol(")");
      if (ast.shifts.empty()) {
        throw FormulaError("empty shift clause", t.offset);
      }
    } else {
      throw FormulaError("unknown clause '" + name + "'", t.offset);
    }
  }

  ShiftTerm parse_shift_term() {
    ShiftTerm term;
    term.v1 = expect_ident("shift variable");
    if (is_symbol(":")) {
      lex_.take();
      term.kind = ShiftTerm::Kind::Interaction;
      term.v2 = expect_ident("interaction variable");
    } else if (is_symbol("*")) {
      lex_.take();
      term.kind = ShiftTerm::Kind::Cross;
      term.v2 = expect_ident("crossed variable");
    } else {
      term.kind = ShiftTerm::Kind::Main;
    }
    return term;
  }

  void parse_strata(FormulaAst& ast) {
    Token t = lex_.peek();
    std::string name = expect_ident("'strata' clause");
    if (name != "strata") {
      throw FormulaError("expected strata clause after '|'", t.offset);
    }
    if (!ast.strata.empty()) {
      throw FormulaError("duplicate strata clause", t.offset);
    }
    expect_symbol("(");
    ast.strata.push_back(expect_ident("stratum variable"));
    while (is_symbol(",")) {
      lex_.take();
      ast.strata.push_back(expect_ident("stratum variable"));
    }
    expect_symbol(")");
    std::set<std::string> seen(ast.strata.begin(), ast.strata.end());
    if (seen.size() != ast.strata.size()) {
      throw FormulaError("repeated stratum variable", t.offset);
    }
  }

  Lexer lex_;
};

std::string print_term(const ShiftTerm& t) {
  switch (t.kind) {
    case ShiftTerm::Kind::Main:
      return t.v1;
    case ShiftTerm::Kind::Interaction:
      return t.v1 + ":" + t.v2;
    case ShiftTerm::Kind::Cross:
      return t.v1 + "*" + t.v2;
  }
  return t.v1;
}

Support values_support(const Vector& values, const std::string& var, const char* role) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  if (!(lo < hi)) {
    throw SpecificationError(std::string(role) + " variable '" + var +
                             "' has no variation");
  }
  double range = hi - lo;
  return Support(lo - 0.1 * range, hi + 0.1 * range);
}

Support data_support(const Dataset& d, const std::string& var,
                     const char* role) {
  if (var == d.response_name()) return values_support(d.response(), var, role);
  const Column& col = d.column(var);
  if (col.type != ColumnType::Numeric) {
    throw SpecificationError(std::string(role) + " variable '" + var +
                             "' must be numeric");
  }
  return values_support(col.numeric, var, role);
}

void check_varying_nonnegative(const Dataset& d, const std::string& var) {
  const Column& col = d.column(var);
  if (col.type != ColumnType::Numeric) {
    throw SpecificationError("varying coefficient variable '" + var +
                             "' must be numeric");
  }
  for (Index i = 0; i < col.numeric.size(); ++i) {
    if (!col.is_missing(i) && col.numeric[i] < 0.0) {
      throw SpecificationError("varying coefficient variable '" + var +
                               "' must be non-negative");
    }
  }
}

// A shift term whose columns are constant within every stratum cell is
// absorbed by the per-cell transformation and makes the fit singular.
void check_identifiable(const FormulaAst& ast) {
  if (ast.strata.empty() || ast.shifts.empty()) return;
  std::set<std::string> strata(ast.strata.begin(), ast.strata.end());
  for (const ShiftTerm& t : ast.shifts) {
    std::vector<std::string> vars = {t.v1};
    if (t.kind != ShiftTerm::Kind::Main) vars.push_back(t.v2);
    bool all_in_strata = true;
    for (const std::string& v : vars) {
      if (strata.count(v) == 0) all_in_strata = false;
    }
    if (all_in_strata) {
      throw SpecificationError("shift term '" + print_term(t) +
                               "' is constant within strata cells");
    }
  }
}

}  // namespace

FormulaAst parse_formula(const std::string& text) {
  Parser p(text);
  return p.parse();
}

std::string print_formula(const FormulaAst& ast) {
  std::string out = ast.response + " ~ ";
  switch (ast.trafo) {
    case FormulaAst::TrafoKind::Linear:
      out += "linear()";
      break;
    case FormulaAst::TrafoKind::Bernstein:
      out += "bernstein(" + std::to_string(ast.order) + ")";
      break;
    case FormulaAst::TrafoKind::Tensor:
      out += "tensor(bernstein(" + std::to_string(ast.order) + "), " +
             ast.tensor_var + ", " + std::to_string(ast.tensor_order) + ")";
      break;
  }
  if (ast.has_varying) out += " + varying(" + ast.varying_var + ")";
  if (!ast.strata.empty()) {
    out += " | strata(";
    for (std::size_t i = 0; i < ast.strata.size(); ++i) {
      if (i > 0) out += ", ";
      out += ast.strata[i];
    }
    out += ")";
  }
  if (!ast.shifts.empty()) {
    out += (ast.strata.empty() ? " + shift(" : " + shift(");
    for (std::size_t i = 0; i < ast.shifts.size(); ++i) {
      if (i > 0) out += " + ";
      out += print_term(ast.shifts[i]);
    }
    out += ")";
  }
  out += " @ " + ast.link;
  return out;
}

ModelSpec lower(const FormulaAst& ast, const Dataset& d) {
  if (ast.response != d.response_name()) {
    throw SpecificationError("formula response '" + ast.response +
                             "' does not match dataset response '" +
                             d.response_name() + "'");
  }
  check_identifiable(ast);

  ModelSpec spec;
  spec.link = Link::from_name(ast.link);
  spec.response = ast.response;
  spec.formula = print_formula(ast);

  Support ysup = data_support(d, ast.response, "response");
  std::vector<BasisBlock> blocks;
  switch (ast.trafo) {
    case FormulaAst::TrafoKind::Linear:
      blocks.push_back(LinearBasis(ysup));
      break;
    case FormulaAst::TrafoKind::Bernstein:
      blocks.push_back(BernsteinBasis(ast.order, ysup));
      break;
    case FormulaAst::TrafoKind::Tensor: {
      Support xsup = data_support(d, ast.tensor_var, "tensor covariate");
      blocks.push_back(TensorBasis(BernsteinBasis(ast.order, ysup),
                                   ast.tensor_var,
                                   BernsteinBasis(ast.tensor_order, xsup)));
      break;
    }
  }
  if (ast.has_varying) {
    if (ast.trafo != FormulaAst::TrafoKind::Bernstein) {
      throw SpecificationError(
          "varying() requires a bernstein transformation term");
    }
    check_varying_nonnegative(d, ast.varying_var);
    blocks.push_back(
        VaryingCoefBasis(BernsteinBasis(ast.order, ysup), ast.varying_var));
  }
  spec.trafo = TransformationBasis(std::move(blocks));

  spec.strata = stratify(d, ast.strata);
  if (!ast.shifts.empty()) spec.shifts = shift_design(d, ast.shifts);
  return spec;
}

ModelSpec lower(const std::string& formula, const Dataset& d) {
  return lower(parse_formula(formula), d);
}

}  // namespace transmod
