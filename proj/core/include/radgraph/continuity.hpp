#pragma once

// Damped Newton for one discrete Dirichlet problem G[v] = rhs and the continuation drivers:
//
//   stage 1  (K = 0, -1)  G[v] = ((1-t) G[v_]/xi(v_) + t eps) xi(v)
//   stage 2  (K = 0, -1)  G[v] = (1-t) eps xi(v) + t psi(z, v, Dv)
//   sphere   (K = 1)      G^t[v] = (1-T(t)) delta2 e^{2v} + T(t) (psi^t[e^v] - eps),
//                         then G[v] = psi - eps_j for eps_j = eps 2^{-j}
//
// G = sigma_k^{1/k}(kappa); the user's psi is the right-hand side of sigma_k = psi and enters
// as psi^{1/k}. The unknown is always a v variable: v = eta^{-1}(u) for K = 0, -1 and
// v = ln u for K = 1 (where the deformed geometry uses u = e^v).

#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "radgraph/curvature.hpp"
#include "radgraph/diagnostics.hpp"
#include "radgraph/dual.hpp"
#include "radgraph/expression.hpp"
#include "radgraph/problem.hpp"
#include "radgraph/sphere_chart.hpp"

namespace radgraph::continuity {

struct ProblemSpec {
  spaceform::SpaceFormParams sf;
  int k = 2;
  chart::GridPtr grid;
  chart::Representation rep = chart::Representation::Rho;  // user-facing variable
  expr::Expression psi;
  expr::Expression boundary;
  chart::GraphField subsolution;  // user representation, every node
  std::optional<expr::Expression> exact;
  double theta_N = 10.0;
};

/// Build the grid, boundary data and subsolution described by a problem file. Relative
/// mask and grid paths are resolved against base_dir; h_override > 0 replaces [domain] h.
ProblemSpec make_spec(const problem::ProblemFile& file, const std::string& base_dir = ".",
                      double h_override = 0.0);

/// Boundary data of the spec at every boundary node (user representation; NaN elsewhere).
Eigen::VectorXd boundary_values(const ProblemSpec& spec);

/// The [reference] exact expression at every node (user representation), if given.
std::optional<chart::GraphField> exact_field(const ProblemSpec& spec);

/// Background for the solver unknown: the space form for K = 0, -1, the deformed
/// family at t = 1 for K = 1.
curvature::Background solver_background(const ProblemSpec& spec);

/// User field <-> solver unknown v.
chart::GraphField to_solver(const ProblemSpec& spec, const chart::GraphField& user);
chart::GraphField to_user(const ProblemSpec& spec, const chart::GraphField& v, chart::Representation rep);

/// Right-hand side in the solver variables: (node, v, coordinate gradient of v).
using RhsFn = std::function<Dual(int node, const Dual& v, const std::vector<Dual>& grad)>;

/// psi^{1/k} seen from the unknown v in background bg. Under deformation rho means
/// zeta^t(u) and the normal components are those of the deformed metric.
RhsFn psi_rhs(const ProblemSpec& spec, const curvature::Background& bg);

struct Equation {
  curvature::Background bg;
  int k = 2;
  RhsFn rhs;
};

enum class Status { Converged, StepFailure, AdmissibilityLoss, MaxIterations };
std::string to_string(Status s);

struct NewtonOptions {
  double tol = 1e-10;          // sup-norm residual
  int max_iter = 40;
  double min_convexity = 1e-10;
  int max_halvings = 30;
  double armijo = 1e-4;
};

struct NewtonResult {
  Status status = Status::Converged;
  Eigen::VectorXd values;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;  // sup-norm residual per iterate, starting with the initial one
  double max_zero_order = 0.0;  // max over nodes of dG/dv - drhs/dv at the last iterate
  int worst_node = -1;
  std::string message;
};

struct Evaluation {
  bool admissible = true;
  int bad_node = -1;
  Eigen::VectorXd residual;  // per interior node
  double sup = 0.0;
  double l2sq = 0.0;
};

Evaluation evaluate(const Equation& eq, const chart::Grid& grid, const Eigen::VectorXd& v, double min_convexity);

NewtonResult newton_solve(const Equation& eq, const chart::GraphField& initial, const NewtonOptions& opts = {});

struct HomotopyConfig {
  std::optional<double> epsilon;
  std::optional<double> delta1;
  std::optional<double> delta2;
  std::optional<int> t_exponent;
  double dt_initial = 0.25;
  double dt_min = 1e-4;
  double dt_max = 0.5;
  double halving = 0.5;
  double growth = 2.0;
  int easy_iterations = 3;       // grow the step after Newton solves this cheap
  double eps_target = 1e-6;      // eps schedule stops at eps_target * inf psi^{1/k}
  std::vector<double> checkpoints{0.25, 0.5, 0.75};
  bool uniqueness_probe = true;
  NewtonOptions newton;
  unsigned seed = 12345;
};

HomotopyConfig config_from(const problem::ProblemFile& file);

struct TracePoint {
  std::string stage;
  double t = 0.0;
  double dt = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double min_ordering = 0.0;  // min(v - v_) over interior nodes
  double max_zero_order = 0.0;
  diagnostics::DiagnosticsRecord diag;
};

struct UniquenessProbe {
  double t = 0.0;
  double sup_difference = 0.0;
  bool converged = false;
};

struct SolveReport {
  Status status = Status::Converged;
  std::string message;
  double residual = 0.0;            // final sup-norm residual of the last solved equation
  double sigma_residual = 0.0;      // sup |sigma_k(kappa) - psi| for the target equation
  std::vector<TracePoint> trace;
  std::vector<UniquenessProbe> uniqueness;
  std::vector<std::string> warnings;
  std::map<std::string, double> constants;  // epsilon, delta1, delta2, T exponent, ...
  std::map<std::string, double> handoff;    // residual at the start of each stage
  double min_ordering = 0.0;        // min over the path of v - v_
  double min_hopf = 0.0;            // min one-sided normal derivative of v - v_ at the boundary
  double max_interior_gap = 0.0;    // max over interior of v_ - v (should be < 0)
  bool all_admissible = true;
  chart::GraphField solution;       // solver variable v
};

nlohmann::json to_json(const SolveReport& r);

struct SubsolutionReport {
  bool ok = true;
  Status status = Status::Converged;
  double min_convexity = 0.0;
  int convexity_node = -1;
  double inequality_margin = 0.0;   // min over interior of G[v_] - psi^{1/k}
  int inequality_node = -1;
  double boundary_mismatch = 0.0;
  int boundary_node = -1;
  std::string message;
};

SubsolutionReport verify_subsolution(const ProblemSpec& spec, double tol = 1e-9);
nlohmann::json to_json(const SubsolutionReport& r);

/// Generic continuation over t in [0, 1]; `family(t)` builds the equation at t.
struct PathResult {
  Status status = Status::Converged;
  std::string message;
  Eigen::VectorXd values;
  std::vector<TracePoint> trace;
  std::map<double, Eigen::VectorXd> checkpoints;
  double handoff_residual = 0.0;
  double min_ordering = 0.0;
  bool all_admissible = true;
};

PathResult continue_path(const std::string& stage, const std::function<Equation(double)>& family,
                         const chart::GraphField& start, const chart::GraphField* lower,
                         const HomotopyConfig& cfg, int diag_k, double theta_N);

/// Stage 1 for K = 0, -1. Returns v^0 (in the report's solution).
SolveReport stage1_path(const ProblemSpec& spec, const HomotopyConfig& cfg);
/// Stage 2 from v^0.
SolveReport stage2_path(const ProblemSpec& spec, const HomotopyConfig& cfg, const chart::GraphField& v0);
/// Both stages.
SolveReport two_stage_solve(const ProblemSpec& spec, const HomotopyConfig& cfg);
/// K = 1 path.
SolveReport sphere_path(const ProblemSpec& spec, const HomotopyConfig& cfg);
/// Dispatch on the space form (or plain Newton from the subsolution when method = newton).
SolveReport solve(const ProblemSpec& spec, const HomotopyConfig& cfg, const std::string& method = "auto");

/// sigma_k(kappa[v]) - psi at each interior node (ordered like grid.interior()).
Eigen::VectorXd sigma_residuals(const ProblemSpec& spec, const chart::GraphField& v);
/// sup |sigma_k(kappa[v]) - psi| over interior nodes for the target equation.
double sigma_residual(const ProblemSpec& spec, const chart::GraphField& v);

}  // namespace radgraph::continuity
