#pragma once

// Problem-definition files: INI-style sections of `key = value` lines, '#' comments.
//
//   [problem]     space_form, k, n, representation
//   [domain]      kind (cap | mask), theta0, mask, h, chart, center
//   [equation]    psi, boundary, subsolution
//   [solver]      tol, max_newton, min_convexity
//   [homotopy]    method, epsilon, delta1, delta2, t_exponent, dt_initial, dt_min,
//                 dt_max, halving, eps_target
//   [diagnostics] theta_N
//   [reference]   exact
//
// psi is the right-hand side of sigma_k(kappa) = psi. boundary, subsolution (expression
// form) and exact are position-only expressions for the declared representation variable.
// The subsolution may also be a builder:
//   sphere R c            Euclidean sphere of radius R centred at c * (chart center)
//   sphere R c1 .. c(n+1) Euclidean sphere with an explicit centre
//   bump s                boundary data lowered by s (tan(theta0)^2 - |y|^2) / mu in u
//   grid PATH             a grid file
//   expr EXPRESSION       explicit expression

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "radgraph/errors.hpp"

namespace radgraph::problem {

struct ProblemFile {
  // [problem]
  int space_form = 0;
  int k = 2;
  int n = 2;
  std::string representation = "rho";
  // [domain]
  std::string domain_kind = "cap";
  double theta0 = 0.0;
  std::string mask;
  double h = 0.0;
  std::string chart = "gnomonic";
  std::vector<double> center;
  // [equation]
  std::string psi;
  std::string boundary;
  std::string subsolution;
  // [solver]
  double tol = 1e-10;
  int max_newton = 40;
  double min_convexity = 1e-10;
  // [homotopy]
  std::string method = "auto";  // auto | two_stage | sphere | newton
  std::optional<double> epsilon;
  std::optional<double> delta1;
  std::optional<double> delta2;
  std::optional<int> t_exponent;
  double dt_initial = 0.25;
  double dt_min = 1e-4;
  double dt_max = 0.5;
  double halving = 0.5;
  double eps_target = 1e-6;
  // [diagnostics]
  double theta_N = 10.0;
  // [reference]
  std::string exact;

  bool operator==(const ProblemFile&) const = default;
};

struct LocatedError {
  int line = 0;
  int column = 0;
  std::string message;
};

/// All errors found while parsing one file; what() lists them one per line.
class ProblemError : public ParseError {
 public:
  explicit ProblemError(std::vector<LocatedError> errors);
  const std::vector<LocatedError>& errors() const { return errors_; }

 private:
  std::vector<LocatedError> errors_;
};

/// Parse and validate; throws ProblemError.
ProblemFile parse_problem(const std::string& text);
std::string to_text(const ProblemFile& p);

nlohmann::json to_json(const ProblemFile& p);
ProblemFile from_json(const nlohmann::json& j);

}  // namespace radgraph::problem
