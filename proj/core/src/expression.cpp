#include "radgraph/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace radgraph::expr {

std::string to_string(RepVar r) {
  switch (r) {
    case RepVar::Rho:
      return "rho";
    case RepVar::U:
      return "u";
    default:
      return "v";
  }
}

std::string Symbols::name(int id) const {
  if (id < n) return "y" + std::to_string(id + 1);
  if (id < 2 * n + 1) return "z" + std::to_string(id - n + 1);
  if (id == rep_var()) return to_string(rep);
  if (id < gradnorm()) return "p" + std::to_string(id - p(0) + 1);
  if (id == gradnorm()) return "gradnorm";
  if (id == nu_rad()) return "nu_rad";
  return "nu_tan" + std::to_string(id - nu_tan(0) + 1);
}

int Symbols::lookup(const std::string& s, bool* wrong_rep) const {
  if (wrong_rep) *wrong_rep = false;
  if (s == "rho" || s == "u" || s == "v") {
    if (s == to_string(rep)) return rep_var();
    if (wrong_rep) *wrong_rep = true;
    return -1;
  }
  if (s == "gradnorm") return gradnorm();
  if (s == "nu_rad") return nu_rad();
  auto indexed = [&](const std::string& prefix, int count) -> int {
    if (s.size() <= prefix.size() || s.compare(0, prefix.size(), prefix) != 0) return -1;
    const std::string digits = s.substr(prefix.size());
    if (digits[0] == '0') return -1;
    for (char c : digits)
      if (!std::isdigit(static_cast<unsigned char>(c))) return -1;
    const int k = std::atoi(digits.c_str());
    return k >= 1 && k <= count ? k - 1 : -1;
  };
  if (int k = indexed("nu_tan", n); k >= 0) return nu_tan(k);
  if (int k = indexed("y", n); k >= 0) return y(k);
  if (int k = indexed("z", n + 1); k >= 0) return z(k);
  if (int k = indexed("p", n); k >= 0) return p(k);
  return -1;
}

// ---------------------------------------------------------------------------
// AST

enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Fn { Exp, Log, Sin, Cos, Tan, Sinh, Cosh, Sqrt, Abs, Min, Max, Pow };

struct Expression::Node {
  Op op = Op::Num;
  double number = 0.0;
  int var = -1;
  Fn fn = Fn::Exp;
  int column = 1;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

struct FnInfo {
  const char* name;
  Fn fn;
  int arity;
};

constexpr FnInfo kFunctions[] = {
    {"exp", Fn::Exp, 1},   {"log", Fn::Log, 1},   {"sin", Fn::Sin, 1},   {"cos", Fn::Cos, 1},
    {"tan", Fn::Tan, 1},   {"sinh", Fn::Sinh, 1}, {"cosh", Fn::Cosh, 1}, {"sqrt", Fn::Sqrt, 1},
    {"abs", Fn::Abs, 1},   {"min", Fn::Min, 2},   {"max", Fn::Max, 2},   {"pow", Fn::Pow, 2},
};

class Parser {
 public:
  Parser(const std::string& text, const Symbols& symbols, std::vector<char>& used)
      : s_(text), sym_(symbols), used_(used) {}

  NodePtr parse() {
    skip();
    if (pos_ >= s_.size()) fail("empty expression");
    NodePtr e = expr();
    skip();
    if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, static_cast<int>(pos_) + 1); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    throw ParseError(msg, 1, static_cast<int>(at) + 1);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Op op, int column, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->column = column;
    n->args = std::move(args);
    return n;
  }

  NodePtr expr() {
    NodePtr left = term();
    while (true) {
      skip();
      const std::size_t at = pos_;
      if (accept('+'))
        left = make(Op::Add, static_cast<int>(at) + 1, {left, term()});
      else if (accept('-'))
        left = make(Op::Sub, static_cast<int>(at) + 1, {left, term()});
      else
        return left;
    }
  }

  NodePtr term() {
    NodePtr left = unary();
    while (true) {
      skip();
      const std::size_t at = pos_;
      if (accept('*'))
        left = make(Op::Mul, static_cast<int>(at) + 1, {left, unary()});
      else if (accept('/'))
        left = make(Op::Div, static_cast<int>(at) + 1, {left, unary()});
      else
        return left;
    }
  }

  NodePtr unary() {
    skip();
    const std::size_t at = pos_;
    if (accept('-')) return make(Op::Neg, static_cast<int>(at) + 1, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    skip();
    const std::size_t at = pos_;
    if (accept('^')) return make(Op::Pow, static_cast<int>(at) + 1, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const std::size_t at = pos_;
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        name += s_[pos_++];
      skip();
      if (pos_ < s_.size() && s_[pos_] == '(') return call(name, at);
      if (name == "pi") {
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Num;
        n->number = std::numbers::pi;
        n->column = static_cast<int>(at) + 1;
        return n;
      }
      bool wrong_rep = false;
      const int id = sym_.lookup(name, &wrong_rep);
      if (wrong_rep)
        fail_at("variable '" + name + "' does not match the declared representation '" +
                    to_string(sym_.rep) + "'",
                at);
      if (id < 0) fail_at("unknown variable '" + name + "'", at);
      used_[static_cast<std::size_t>(id)] = 1;
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::Var;
      n->var = id;
      n->column = static_cast<int>(at) + 1;
      return n;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    const std::size_t at = pos_;
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Num;
    n->number = v;
    n->column = static_cast<int>(at) + 1;
    return n;
  }

  NodePtr call(const std::string& name, std::size_t at) {
    const FnInfo* info = nullptr;
    for (const auto& f : kFunctions)
      if (name == f.name) info = &f;
    if (!info) fail_at("unknown function '" + name + "'", at);
    accept('(');
    std::vector<NodePtr> args;
    args.push_back(expr());
    while (accept(',')) args.push_back(expr());
    if (!accept(')')) fail("expected ')' or ','");
    if (static_cast<int>(args.size()) != info->arity)
      fail_at("function '" + name + "' takes " + std::to_string(info->arity) + " argument(s)", at);
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Call;
    n->fn = info->fn;
    n->column = static_cast<int>(at) + 1;
    n->args = std::move(args);
    return n;
  }

  const std::string& s_;
  const Symbols& sym_;
  std::vector<char>& used_;
  std::size_t pos_ = 0;
};

template <class T>
void check(const T& x, const Expression::Node& node) {
  if (!std::isfinite(value_of(x))) throw EvalError("non-finite value", node.column);
}

template <class T>
T evaluate(const Expression::Node& node, const std::vector<T>& vars) {
  using std::abs, std::cos, std::cosh, std::exp, std::log, std::pow, std::sin, std::sinh, std::sqrt, std::tan;
  auto arg = [&](std::size_t i) { return evaluate<T>(*node.args[i], vars); };
  T r{};
  switch (node.op) {
    case Op::Num:
      return T(node.number);
    case Op::Var:
      r = vars[static_cast<std::size_t>(node.var)];
      break;
    case Op::Neg:
      r = -arg(0);
      break;
    case Op::Add:
      r = arg(0) + arg(1);
      break;
    case Op::Sub:
      r = arg(0) - arg(1);
      break;
    case Op::Mul:
      r = arg(0) * arg(1);
      break;
    case Op::Div: {
      const T a = arg(0);
      const T b = arg(1);
      if (value_of(b) == 0.0) throw EvalError("division by zero", node.column);
      r = a / b;
      break;
    }
    case Op::Pow:
      r = pow(arg(0), arg(1));
      break;
    case Op::Call:
      switch (node.fn) {
        case Fn::Exp:
          r = exp(arg(0));
          break;
        case Fn::Log:
          r = log(arg(0));
          break;
        case Fn::Sin:
          r = sin(arg(0));
          break;
        case Fn::Cos:
          r = cos(arg(0));
          break;
        case Fn::Tan:
          r = tan(arg(0));
          break;
        case Fn::Sinh:
          r = sinh(arg(0));
          break;
        case Fn::Cosh:
          r = cosh(arg(0));
          break;
        case Fn::Sqrt:
          r = sqrt(arg(0));
          break;
        case Fn::Abs:
          r = abs(arg(0));
          break;
        case Fn::Min: {
          const T a = arg(0);
          const T b = arg(1);
          r = value_of(b) < value_of(a) ? b : a;
          break;
        }
        case Fn::Max: {
          const T a = arg(0);
          const T b = arg(1);
          r = value_of(b) > value_of(a) ? b : a;
          break;
        }
        case Fn::Pow:
          r = pow(arg(0), arg(1));
          break;
      }
      break;
  }
  check(r, node);
  return r;
}

}  // namespace

Expression Expression::parse(const std::string& text, const Symbols& symbols) {
  Expression e;
  e.text_ = text;
  e.symbols_ = symbols;
  e.used_.assign(static_cast<std::size_t>(symbols.count()), 0);
  e.root_ = Parser(text, symbols, e.used_).parse();
  return e;
}

bool Expression::uses(int var) const {
  return var >= 0 && var < static_cast<int>(used_.size()) && used_[static_cast<std::size_t>(var)];
}

bool Expression::position_only() const {
  for (int id = symbols_.rep_var(); id < symbols_.count(); ++id)
    if (uses(id)) return false;
  return true;
}

bool Expression::is_constant() const {
  for (char c : used_)
    if (c) return false;
  return true;
}

double Expression::eval(const std::vector<double>& vars) const {
  if (!root_) throw EvalError("empty expression", 1);
  if (static_cast<int>(vars.size()) < symbols_.count()) throw EvalError("missing variable values", 1);
  return evaluate<double>(*root_, vars);
}

Dual Expression::eval(const std::vector<Dual>& vars) const {
  if (!root_) throw EvalError("empty expression", 1);
  if (static_cast<int>(vars.size()) < symbols_.count()) throw EvalError("missing variable values", 1);
  return evaluate<Dual>(*root_, vars);
}

}  // namespace radgraph::expr
