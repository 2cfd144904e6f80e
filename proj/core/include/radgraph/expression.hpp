#pragma once

// Small arithmetic expression language for right-hand sides, boundary data and
// subsolutions. Grammar (usual precedence, ^ is right associative and binds tighter
// than unary minus):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: exp log sin cos tan sinh cosh sqrt abs (one argument), min max pow (two).
// Constant: pi. Variables: y1..yn, z1..z(n+1), the representation variable (rho, u or v),
// p1..pn (chart gradient of that variable), gradnorm, nu_rad, nu_tan1..nu_tann.

#include <memory>
#include <string>
#include <vector>

#include "radgraph/dual.hpp"
#include "radgraph/errors.hpp"

namespace radgraph::expr {

enum class RepVar { Rho, U, V };

/// Which variables an expression may reference.
struct Symbols {
  int n = 2;
  RepVar rep = RepVar::U;

  int count() const { return 4 * n + 4; }
  int y(int i) const { return i; }
  int z(int i) const { return n + i; }
  int rep_var() const { return 2 * n + 1; }
  int p(int i) const { return 2 * n + 2 + i; }
  int gradnorm() const { return 3 * n + 2; }
  int nu_rad() const { return 3 * n + 3; }
  int nu_tan(int i) const { return 3 * n + 4 + i; }

  std::string name(int id) const;
  /// Variable id for a name, or -1 if unknown. Sets *wrong_rep when the name is a
  /// representation variable other than the declared one.
  int lookup(const std::string& name, bool* wrong_rep = nullptr) const;
};

std::string to_string(RepVar r);

class Expression {
 public:
  /// Throws ParseError (line 1, 1-based column) on syntax or semantic errors.
  static Expression parse(const std::string& text, const Symbols& symbols);

  const std::string& text() const { return text_; }
  const Symbols& symbols() const { return symbols_; }
  bool uses(int var) const;
  /// True when the value depends only on position (no unknown, gradient or normal).
  bool position_only() const;
  bool is_constant() const;

  /// Evaluate with one value per symbol id. Throws EvalError on division by zero or a
  /// non-finite intermediate result.
  double eval(const std::vector<double>& vars) const;
  Dual eval(const std::vector<Dual>& vars) const;

  struct Node;

 private:
  std::string text_;
  Symbols symbols_;
  std::shared_ptr<const Node> root_;
  std::vector<char> used_;
};

}  // namespace radgraph::expr
