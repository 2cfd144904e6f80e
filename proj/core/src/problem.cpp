#include "radgraph/problem.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "radgraph/expression.hpp"

namespace radgraph::problem {

namespace {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw std::invalid_argument("expected a number, found '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("expected an integer, found '" + s + "'");
  return v;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::istringstream is(s);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_double(tok));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
  return out;
}

enum class Kind { Int, Double, String, OptDouble, OptInt, Doubles };

struct Field {
  const char* section;
  const char* key;
  Kind kind;
  std::function<void(ProblemFile&, const std::string&)> set;
  std::function<std::optional<std::string>(const ProblemFile&)> get;
};

template <class M>
Field make_field(const char* section, const char* key, M ProblemFile::*member) {
  Field f{section, key, Kind::String, {}, {}};
  if constexpr (std::is_same_v<M, int>) {
    f.kind = Kind::Int;
    f.set = [member](ProblemFile& p, const std::string& s) { p.*member = parse_int(s); };
    f.get = [member](const ProblemFile& p) { return std::optional<std::string>(std::to_string(p.*member)); };
  } else if constexpr (std::is_same_v<M, double>) {
    f.kind = Kind::Double;
    f.set = [member](ProblemFile& p, const std::string& s) { p.*member = parse_double(s); };
    f.get = [member](const ProblemFile& p) { return std::optional<std::string>(format_double(p.*member)); };
  } else if constexpr (std::is_same_v<M, std::string>) {
    f.kind = Kind::String;
    f.set = [member](ProblemFile& p, const std::string& s) { p.*member = s; };
    f.get = [member](const ProblemFile& p) {
      return (p.*member).empty() ? std::nullopt : std::optional<std::string>(p.*member);
    };
  } else if constexpr (std::is_same_v<M, std::optional<double>>) {
    f.kind = Kind::OptDouble;
    f.set = [member](ProblemFile& p, const std::string& s) {
      if (s == "auto")
        p.*member = std::nullopt;
      else
        p.*member = parse_double(s);
    };
    f.get = [member](const ProblemFile& p) {
      return (p.*member) ? std::optional<std::string>(format_double(*(p.*member))) : std::nullopt;
    };
  } else if constexpr (std::is_same_v<M, std::optional<int>>) {
    f.kind = Kind::OptInt;
    f.set = [member](ProblemFile& p, const std::string& s) {
      if (s == "auto")
        p.*member = std::nullopt;
      else
        p.*member = parse_int(s);
    };
    f.get = [member](const ProblemFile& p) {
      return (p.*member) ? std::optional<std::string>(std::to_string(*(p.*member))) : std::nullopt;
    };
  } else {
    f.kind = Kind::Doubles;
    f.set = [member](ProblemFile& p, const std::string& s) { p.*member = parse_doubles(s); };
    f.get = [member](const ProblemFile& p) {
      return (p.*member).empty() ? std::nullopt : std::optional<std::string>(join(p.*member));
    };
  }
  return f;
}

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      make_field("problem", "space_form", &ProblemFile::space_form),
      make_field("problem", "k", &ProblemFile::k),
      make_field("problem", "n", &ProblemFile::n),
      make_field("problem", "representation", &ProblemFile::representation),
      make_field("domain", "kind", &ProblemFile::domain_kind),
      make_field("domain", "theta0", &ProblemFile::theta0),
      make_field("domain", "mask", &ProblemFile::mask),
      make_field("domain", "h", &ProblemFile::h),
      make_field("domain", "chart", &ProblemFile::chart),
      make_field("domain", "center", &ProblemFile::center),
      make_field("equation", "psi", &ProblemFile::psi),
      make_field("equation", "boundary", &ProblemFile::boundary),
      make_field("equation", "subsolution", &ProblemFile::subsolution),
      make_field("solver", "tol", &ProblemFile::tol),
      make_field("solver", "max_newton", &ProblemFile::max_newton),
      make_field("solver", "min_convexity", &ProblemFile::min_convexity),
      make_field("homotopy", "method", &ProblemFile::method),
      make_field("homotopy", "epsilon", &ProblemFile::epsilon),
      make_field("homotopy", "delta1", &ProblemFile::delta1),
      make_field("homotopy", "delta2", &ProblemFile::delta2),
      make_field("homotopy", "t_exponent", &ProblemFile::t_exponent),
      make_field("homotopy", "dt_initial", &ProblemFile::dt_initial),
      make_field("homotopy", "dt_min", &ProblemFile::dt_min),
      make_field("homotopy", "dt_max", &ProblemFile::dt_max),
      make_field("homotopy", "halving", &ProblemFile::halving),
      make_field("homotopy", "eps_target", &ProblemFile::eps_target),
      make_field("diagnostics", "theta_N", &ProblemFile::theta_N),
      make_field("reference", "exact", &ProblemFile::exact),
  };
  return fields;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : schema())
    if (section == f.section && key == f.key) return &f;
  return nullptr;
}

bool known_section(const std::string& s) {
  for (const auto& f : schema())
    if (s == f.section) return true;
  return false;
}

struct Location {
  int line = 0;
  int column = 0;
};

class Validator {
 public:
  Validator(const ProblemFile& p, const std::map<std::string, Location>& where, std::vector<LocatedError>& errs)
      : p_(p), where_(where), errs_(errs) {}

  void error(const std::string& key, const std::string& msg, int column_offset = 0) {
    auto it = where_.find(key);
    Location loc = it == where_.end() ? Location{} : it->second;
    errs_.push_back({loc.line, loc.column + (column_offset > 0 ? column_offset - 1 : 0), msg});
  }

  void require(const std::string& key, const std::string& what) {
    if (!where_.count(key)) errs_.push_back({0, 0, "missing required key " + key + " (" + what + ")"});
  }

  void expression(const std::string& key, const std::string& text, bool position_only) {
    if (text.empty()) return;
    expr::Symbols sym;
    sym.n = p_.n;
    sym.rep = p_.representation == "u" ? expr::RepVar::U
              : p_.representation == "v" ? expr::RepVar::V
                                         : expr::RepVar::Rho;
    try {
      const auto e = expr::Expression::parse(text, sym);
      if (position_only && !e.position_only())
        error(key, "expression may depend on position only (y, z)");
    } catch (const ParseError& pe) {
      error(key, pe.message(), pe.column());
    }
  }

  void run() {
    const auto& p = p_;
    require("equation.psi", "right-hand side");
    require("equation.boundary", "boundary data");
    require("equation.subsolution", "subsolution");
    require("domain.h", "grid spacing");

    if (p.space_form < -1 || p.space_form > 1) error("problem.space_form", "space_form must be -1, 0 or 1");
    if (p.n < 2 || p.n > 3) error("problem.n", "n must be 2 or 3");
    if (p.k < 1 || p.k > p.n) error("problem.k", "k must satisfy 1 <= k <= n");
    if (p.representation != "rho" && p.representation != "u" && p.representation != "v")
      error("problem.representation", "representation must be rho, u or v");

    if (p.domain_kind == "cap") {
      if (!(p.theta0 > 0.0)) error("domain.theta0", "cap radius theta0 must be positive");
      if (!(p.theta0 < std::numbers::pi / 2.0))
        error("domain.theta0", "cap radius theta0 >= pi/2 contains a hemisphere");
    } else if (p.domain_kind == "mask") {
      if (p.mask.empty()) error("domain.kind", "mask domains need a mask file");
    } else {
      error("domain.kind", "domain kind must be cap or mask");
    }
    if (!(p.h > 0.0) && where_.count("domain.h")) error("domain.h", "grid spacing must be positive");
    if (p.chart != "gnomonic" && p.chart != "plane") error("domain.chart", "chart must be gnomonic or plane");
    if (!p.center.empty()) {
      if (p.chart != "gnomonic") error("domain.center", "only the gnomonic chart takes a center");
      if (static_cast<int>(p.center.size()) != p.n + 1) error("domain.center", "center needs n + 1 components");
    }

    expression("equation.psi", p.psi, false);
    expression("equation.boundary", p.boundary, true);
    expression("reference.exact", p.exact, true);
    subsolution();

    if (!(p.tol > 0.0)) error("solver.tol", "tol must be positive");
    if (p.max_newton < 1) error("solver.max_newton", "max_newton must be at least 1");
    if (!(p.min_convexity >= 0.0)) error("solver.min_convexity", "min_convexity must be nonnegative");

    if (p.method != "auto" && p.method != "two_stage" && p.method != "sphere" && p.method != "newton")
      error("homotopy.method", "method must be auto, two_stage, sphere or newton");
    if (p.method == "two_stage" && p.space_form == 1)
      error("homotopy.method", "the two-stage (xi-based) homotopy is not available for space_form = 1");
    if (p.method == "sphere" && p.space_form != 1)
      error("homotopy.method", "the sphere homotopy needs space_form = 1");
    if ((p.method == "auto" || p.method == "two_stage" || p.method == "sphere") && p.k != p.n &&
        where_.count("problem.k"))
      error("problem.k", "continuation drivers need k = n; use method = newton for k < n");
    if (p.epsilon && !(*p.epsilon > 0.0)) error("homotopy.epsilon", "epsilon must be positive");
    if (p.delta1 && !(*p.delta1 > 0.0 && *p.delta1 < 1.0)) error("homotopy.delta1", "delta1 must be in (0, 1)");
    if (p.delta2 && !(*p.delta2 > 0.0)) error("homotopy.delta2", "delta2 must be positive");
    if (p.t_exponent && *p.t_exponent < 1) error("homotopy.t_exponent", "t_exponent must be at least 1");
    if (!(p.dt_initial > 0.0 && p.dt_initial <= 1.0)) error("homotopy.dt_initial", "dt_initial must be in (0, 1]");
    if (!(p.dt_min > 0.0 && p.dt_min <= p.dt_initial)) error("homotopy.dt_min", "dt_min must be in (0, dt_initial]");
    if (!(p.dt_max >= p.dt_initial && p.dt_max <= 1.0)) error("homotopy.dt_max", "dt_max must be in [dt_initial, 1]");
    if (!(p.halving > 0.0 && p.halving < 1.0)) error("homotopy.halving", "halving must be in (0, 1)");
    if (!(p.eps_target > 0.0)) error("homotopy.eps_target", "eps_target must be positive");
    if (!(p.theta_N > 0.0)) error("diagnostics.theta_N", "theta_N must be positive");
  }

 private:
  void subsolution() {
    const auto& p = p_;
    const std::string& s = p.subsolution;
    if (s.empty()) return;
    std::istringstream is(s);
    std::string head;
    is >> head;
    const std::string key = "equation.subsolution";
    if (head == "sphere") {
      std::vector<double> args;
      try {
        std::string rest;
        std::getline(is, rest);
        args = parse_doubles(rest);
      } catch (const std::invalid_argument& e) {
        error(key, e.what());
        return;
      }
      if (args.size() != 2 && static_cast<int>(args.size()) != p.n + 2)
        error(key, "sphere takes R and a scalar offset or R and n + 1 centre components");
      else if (!(args[0] > 0.0))
        error(key, "sphere radius must be positive");
      if (p.space_form != 0) error(key, "the sphere builder describes Euclidean spheres (space_form = 0)");
    } else if (head == "bump") {
      std::string rest;
      std::getline(is, rest);
      try {
        const auto args = parse_doubles(rest);
        if (args.size() != 1 || !(args[0] >= 0.0)) error(key, "bump takes one nonnegative amplitude");
      } catch (const std::invalid_argument& e) {
        error(key, e.what());
      }
      if (p.domain_kind != "cap" || p.chart != "gnomonic")
        error(key, "bump needs a cap domain in the gnomonic chart");
    } else if (head == "grid") {
      std::string rest;
      std::getline(is, rest);
      if (trim(rest).empty()) error(key, "grid needs a file path");
    } else if (head == "expr") {
      const auto pos = s.find("expr") + 4;
      expression(key, s.substr(pos), true);
    } else {
      error(key, "subsolution must be sphere, bump, grid or expr");
    }
  }

  const ProblemFile& p_;
  const std::map<std::string, Location>& where_;
  std::vector<LocatedError>& errs_;
};

std::string describe(const std::vector<LocatedError>& errors) {
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += "\n";
    if (e.line > 0) out += std::to_string(e.line) + ":" + std::to_string(e.column) + ": ";
    out += e.message;
  }
  return out;
}

}  // namespace

ProblemError::ProblemError(std::vector<LocatedError> errors)
    : ParseError(describe(errors), 0, 0), errors_(std::move(errors)) {}

ProblemFile parse_problem(const std::string& text) {
  ProblemFile p;
  std::vector<LocatedError> errors;
  std::map<std::string, Location> where;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const int indent = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back({line_no, indent, "unterminated section header"});
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) errors.push_back({line_no, indent + 1, "unknown section '" + section + "'"});
      continue;
    }
    const auto eq = raw.find('=');
    if (eq == std::string::npos) {
      errors.push_back({line_no, indent, "expected 'key = value'"});
      continue;
    }
    const std::string key = trim(raw.substr(0, eq));
    std::string value = raw.substr(eq + 1);
    const auto vstart = value.find_first_not_of(" \t");
    const int value_col = static_cast<int>(eq) + 2 + (vstart == std::string::npos ? 0 : static_cast<int>(vstart));
    value = trim(value);
    if (section.empty()) {
      errors.push_back({line_no, indent, "key '" + key + "' outside any section"});
      continue;
    }
    if (!known_section(section)) continue;
    const Field* f = find_field(section, key);
    if (!f) {
      errors.push_back({line_no, indent, "unknown key '" + key + "' in section [" + section + "]"});
      continue;
    }
    const std::string full = section + "." + key;
    if (where.count(full)) {
      errors.push_back({line_no, indent, "duplicate key '" + key + "'"});
      continue;
    }
    where[full] = {line_no, value_col};
    try {
      f->set(p, value);
    } catch (const std::invalid_argument& e) {
      errors.push_back({line_no, value_col, e.what()});
    }
  }
  if (errors.empty()) Validator(p, where, errors).run();
  if (!errors.empty()) throw ProblemError(std::move(errors));
  return p;
}

std::string to_text(const ProblemFile& p) {
  std::string out;
  std::string section;
  for (const auto& f : schema()) {
    const auto v = f.get(p);
    if (!v) continue;
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + *v + "\n";
  }
  return out;
}

nlohmann::json to_json(const ProblemFile& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : schema()) {
    const auto v = f.get(p);
    if (!v) continue;
    auto& slot = j[f.section][f.key];
    switch (f.kind) {
      case Kind::Int:
      case Kind::OptInt:
        slot = parse_int(*v);
        break;
      case Kind::Double:
      case Kind::OptDouble:
        slot = parse_double(*v);
        break;
      case Kind::Doubles:
        slot = parse_doubles(*v);
        break;
      default:
        slot = *v;
    }
  }
  return j;
}

ProblemFile from_json(const nlohmann::json& j) {
  ProblemFile p;
  for (const auto& f : schema()) {
    if (!j.contains(f.section) || !j[f.section].contains(f.key)) continue;
    const auto& v = j[f.section][f.key];
    switch (f.kind) {
      case Kind::Int:
      case Kind::OptInt:
        f.set(p, std::to_string(v.get<int>()));
        break;
      case Kind::Double:
      case Kind::OptDouble:
        f.set(p, format_double(v.get<double>()));
        break;
      case Kind::Doubles:
        f.set(p, join(v.get<std::vector<double>>()));
        break;
      default:
        f.set(p, v.get<std::string>());
    }
  }
  return p;
}

}  // namespace radgraph::problem
