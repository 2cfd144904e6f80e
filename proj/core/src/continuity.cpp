#include "radgraph/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "radgraph/errors.hpp"
#include "radgraph/linearization.hpp"
#include "radgraph/small_linalg.hpp"

namespace radgraph::continuity {

using chart::GraphField;
using chart::Grid;
using chart::Representation;
using curvature::Background;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

expr::RepVar rep_var(Representation r) {
  switch (r) {
    case Representation::U:
      return expr::RepVar::U;
    case Representation::V:
      return expr::RepVar::V;
    default:
      return expr::RepVar::Rho;
  }
}

double user_to_u(const spaceform::SpaceFormParams& sf, Representation rep, double x) {
  switch (rep) {
    case Representation::Rho:
      return spaceform::zeta_inverse(sf, x);
    case Representation::V:
      return spaceform::eta(sf, x);
    default:
      return x;
  }
}

double u_to_user(const spaceform::SpaceFormParams& sf, Representation rep, double u) {
  switch (rep) {
    case Representation::Rho:
      return spaceform::zeta(sf, u);
    case Representation::V:
      return spaceform::eta_inverse(sf, u);
    default:
      return u;
  }
}

std::vector<double> position_vars(const expr::Symbols& sym, const Grid& grid, int node) {
  std::vector<double> vars(static_cast<std::size_t>(sym.count()), 0.0);
  const VectorXd& y = grid.node(node).y;
  const VectorXd z = grid.chart().to_sphere(y);
  for (int i = 0; i < sym.n; ++i) vars[static_cast<std::size_t>(sym.y(i))] = y(i);
  for (int i = 0; i <= sym.n; ++i) vars[static_cast<std::size_t>(sym.z(i))] = z(i);
  return vars;
}

VectorXd eval_position(const expr::Expression& e, const Grid& grid) {
  VectorXd out(grid.size());
  for (int id = 0; id < grid.size(); ++id) out(id) = e.eval(position_vars(e.symbols(), grid, id));
  return out;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
  return p.string();
}

chart::Mask read_mask(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mask file " + path);
  std::vector<std::vector<int>> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::vector<int> idx;
    int v = 0;
    while (is >> v) idx.push_back(v);
    if (!is.eof()) throw ParseError("mask entries must be integers", line_no, 1);
    if (idx.empty()) continue;
    if (static_cast<int>(idx.size()) != n) throw ParseError("mask line needs n lattice indices", line_no, 1);
    pts.push_back(idx);
  }
  if (pts.empty()) throw Error("mask file " + path + " lists no nodes");
  chart::Mask m;
  m.lo = pts.front();
  m.hi = pts.front();
  for (const auto& p : pts)
    for (int i = 0; i < n; ++i) {
      m.lo[static_cast<std::size_t>(i)] = std::min(m.lo[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i)]);
      m.hi[static_cast<std::size_t>(i)] = std::max(m.hi[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i)]);
    }
  std::size_t total = 1;
  for (int i = 0; i < n; ++i)
    total *= static_cast<std::size_t>(m.hi[static_cast<std::size_t>(i)] - m.lo[static_cast<std::size_t>(i)] + 1);
  m.inside.assign(total, 0);
  for (const auto& p : pts) m.inside[m.flat(p)] = 1;
  return m;
}

std::vector<double> numbers(const std::string& s) {
  std::istringstream is(s);
  std::vector<double> out;
  double x = 0.0;
  while (is >> x) out.push_back(x);
  return out;
}

// Subsolution in the user representation at every node.
VectorXd build_subsolution(const problem::ProblemFile& file, const ProblemSpec& spec, const std::string& base_dir) {
  const Grid& grid = *spec.grid;
  const int n = grid.dim();
  std::istringstream is(file.subsolution);
  std::string head;
  is >> head;
  std::string rest;
  std::getline(is, rest);
  VectorXd out(grid.size());

  if (head == "sphere") {
    const auto args = numbers(rest);
    const double R = args.at(0);
    VectorXd C;
    if (args.size() == 2) {
      C = args[1] * grid.chart().center();
    } else {
      C.resize(n + 1);
      for (int i = 0; i <= n; ++i) C(i) = args[static_cast<std::size_t>(i) + 1];
    }
    for (int id = 0; id < grid.size(); ++id) {
      const VectorXd z = grid.chart().to_sphere(grid.node(id).y);
      const double cz = C.dot(z);
      const double disc = R * R - C.squaredNorm() + cz * cz;
      if (!(disc > 0.0)) throw DomainError("sphere subsolution does not meet the ray through a domain point");
      const double rho = cz + std::sqrt(disc);
      if (!(rho > 0.0)) throw DomainError("sphere subsolution is not a radial graph over the domain");
      out(id) = u_to_user(spec.sf, spec.rep, spaceform::zeta_inverse(spec.sf, rho));
    }
  } else if (head == "bump") {
    const double s = numbers(rest).at(0);
    const double t2 = std::pow(std::tan(file.theta0), 2);
    const VectorXd b = eval_position(spec.boundary, grid);
    for (int id = 0; id < grid.size(); ++id) {
      const VectorXd& y = grid.node(id).y;
      const double mu = std::sqrt(1.0 + y.squaredNorm());
      const double u = user_to_u(spec.sf, spec.rep, b(id)) - s * std::max(0.0, t2 - y.squaredNorm()) / mu;
      out(id) = u_to_user(spec.sf, spec.rep, u);
    }
  } else if (head == "grid") {
    const auto path = resolve(base_dir, std::string(rest.begin() + static_cast<long>(rest.find_first_not_of(" \t")),
                                                    rest.end()));
    std::ifstream in(path);
    if (!in) throw Error("cannot open subsolution grid " + path);
    const GraphField f = chart::read_grid(in);
    if (f.grid->size() != grid.size()) throw Error("subsolution grid does not match the problem grid");
    for (int id = 0; id < grid.size(); ++id) {
      if ((f.grid->node(id).y - grid.node(id).y).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + grid.node(id).y.norm()))
        throw Error("subsolution grid node positions differ from the problem grid");
      const double u = user_to_u(spec.sf, f.rep, f.values(id));
      out(id) = u_to_user(spec.sf, spec.rep, u);
    }
  } else {
    const auto pos = file.subsolution.find("expr") + 4;
    const auto e = expr::Expression::parse(file.subsolution.substr(pos), spec.psi.symbols());
    out = eval_position(e, grid);
  }
  return out;
}

Dual xi_dual(int K, const Dual& v) { return K == 0 ? exp(2.0 * v) : sinh(v); }

Dual safe_sqrt(const Dual& a) {
  if (a.value() <= 0.0) return Dual(0.0);
  return sqrt(a);
}

// One pass over the interior: residual, admissibility and (optionally) the Newton coefficients.
struct Sweep {
  Evaluation eval;
  std::vector<linearization::CoordinateCoefficients> coeffs;
  double max_zero_order = -kInf;
  std::string failure;
};

Sweep sweep(const Equation& eq, const Grid& grid, const VectorXd& v, double min_convexity, bool linearize) {
  Sweep s;
  const auto& interior = grid.interior();
  const int n = grid.dim();
  s.eval.residual.resize(static_cast<Eigen::Index>(interior.size()));
  if (linearize) s.coeffs.reserve(interior.size());
  for (std::size_t row = 0; row < interior.size(); ++row) {
    const int node = interior[row];
    try {
      const auto& pg = grid.geometry(node);
      const chart::Jet j = chart::jet(grid, v, node);
      const curvature::FrameJet x = curvature::frame_jet(j, pg);
      const auto st = curvature::geometry_v(x, eq.bg);
      if (!(min_eigenvalue(st.convexity) >= min_convexity))
        throw AdmissibilityError("convexity matrix is not positive definite", node);
      std::vector<Dual> grad(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) grad[static_cast<std::size_t>(i)] = Dual::variable(j.grad(i), static_cast<std::size_t>(i) + 1);
      const Dual r = eq.rhs(node, Dual::variable(j.value, 0), grad);
      double f = 0.0;
      if (linearize) {
        auto lc = linearization::coefficients_v(st, x, eq.bg, eq.k);
        VectorXd pc(n);
        for (int i = 0; i < n; ++i) pc(i) = r.d(static_cast<std::size_t>(i) + 1);
        linearization::set_rhs_derivatives(lc, r.d(0), pc, pg);
        const auto cc = linearization::to_coordinates(lc, pg);
        s.max_zero_order = std::max(s.max_zero_order, cc.d_u);
        s.coeffs.push_back(cc);
        f = lc.G;
      } else {
        f = curvature::f_and_derivatives(st.kappa, eq.k).f;
      }
      const double res = f - r.value();
      if (!std::isfinite(res)) throw AdmissibilityError("non-finite residual", node);
      s.eval.residual(static_cast<Eigen::Index>(row)) = res;
    } catch (const Error& e) {
      s.eval.admissible = false;
      s.eval.bad_node = node;
      s.failure = e.what();
      s.eval.sup = kInf;
      s.eval.l2sq = kInf;
      return s;
    }
  }
  s.eval.sup = interior.empty() ? 0.0 : s.eval.residual.lpNorm<Eigen::Infinity>();
  s.eval.l2sq = s.eval.residual.squaredNorm();
  return s;
}

// G[x] at every interior node for an admissible field (throws otherwise).
VectorXd operator_values(const Grid& grid, const VectorXd& v, const Background& bg, int k) {
  VectorXd out(static_cast<Eigen::Index>(grid.interior().size()));
  for (std::size_t row = 0; row < grid.interior().size(); ++row) {
    const int node = grid.interior()[row];
    const auto x = curvature::frame_jet(chart::jet(grid, v, node), grid.geometry(node));
    const auto st = curvature::geometry_v(x, bg);
    out(static_cast<Eigen::Index>(row)) = curvature::f_and_derivatives(st.kappa, k).f;
  }
  return out;
}

// Right-hand side values (no derivatives) at every interior node.
VectorXd rhs_values(const Grid& grid, const VectorXd& v, const RhsFn& rhs) {
  const int n = grid.dim();
  VectorXd out(static_cast<Eigen::Index>(grid.interior().size()));
  for (std::size_t row = 0; row < grid.interior().size(); ++row) {
    const int node = grid.interior()[row];
    const chart::Jet j = chart::jet(grid, v, node);
    std::vector<Dual> grad(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) grad[static_cast<std::size_t>(i)] = Dual(j.grad(i));
    out(static_cast<Eigen::Index>(row)) = rhs(node, Dual(j.value), grad).value();
  }
  return out;
}

double min_interior_difference(const Grid& grid, const VectorXd& a, const VectorXd& b) {
  double m = kInf;
  for (int node : grid.interior()) m = std::min(m, a(node) - b(node));
  return grid.interior().empty() ? 0.0 : m;
}

double sup_interior_difference(const Grid& grid, const VectorXd& a, const VectorXd& b) {
  double m = 0.0;
  for (int node : grid.interior()) m = std::max(m, std::abs(a(node) - b(node)));
  return m;
}

GraphField as_field(const chart::GridPtr& grid, const VectorXd& values) {
  GraphField f;
  f.grid = grid;
  f.values = values;
  f.rep = Representation::V;
  return f;
}

// Subsolution in the solver variable with the Dirichlet data imposed on the boundary.
GraphField solver_lower(const ProblemSpec& spec) {
  GraphField lower = to_solver(spec, spec.subsolution);
  const VectorXd b = boundary_values(spec);
  const auto bg = solver_background(spec);
  for (int node : spec.grid->boundary()) lower.values(node) = bg.eta_inverse(user_to_u(spec.sf, spec.rep, b(node)));
  return lower;
}

Equation target_equation(const ProblemSpec& spec) {
  const auto bg = solver_background(spec);
  return Equation{bg, spec.k, psi_rhs(spec, bg)};
}

void require_gauss(const ProblemSpec& spec) {
  if (spec.k != spec.grid->dim())
    throw UnsupportedError("the continuation drivers need k = n; use method = newton for k < n");
}

void append(SolveReport& r, const PathResult& p) {
  r.trace.insert(r.trace.end(), p.trace.begin(), p.trace.end());
  r.all_admissible = r.all_admissible && p.all_admissible;
  r.min_ordering = std::min(r.min_ordering, p.min_ordering);
}

// Ordering and boundary-slope diagnostics against the lower field.
void boundary_diagnostics(SolveReport& r, const Grid& grid, const VectorXd& v, const VectorXd& lower) {
  r.min_hopf = kInf;
  for (int b : grid.boundary()) {
    Grid::BoundaryLink link;
    try {
      link = grid.boundary_link(b);
    } catch (const DomainError&) {
      continue;
    }
    if (link.owner < 0) continue;
    const double dist = (grid.node(link.owner).y - grid.node(b).y).norm();
    const double slope = ((v(link.owner) - lower(link.owner)) - (v(b) - lower(b))) / dist;
    r.min_hopf = std::min(r.min_hopf, slope);
  }
  if (!std::isfinite(r.min_hopf)) r.min_hopf = 0.0;
  r.max_interior_gap = -kInf;
  for (int node : grid.interior()) r.max_interior_gap = std::max(r.max_interior_gap, lower(node) - v(node));
  if (!std::isfinite(r.max_interior_gap)) r.max_interior_gap = 0.0;
  if (r.max_interior_gap >= 0.0) {
    std::ostringstream os;
    os << "strict ordering v > v_ fails in the interior (max v_ - v = " << r.max_interior_gap << ")";
    r.warnings.push_back(os.str());
  }
  if (r.min_hopf <= 0.0) {
    std::ostringstream os;
    os << "discrete Hopf check: min inward slope of v - v_ is " << r.min_hopf;
    r.warnings.push_back(os.str());
  }
}

void ordering_warning(SolveReport& r, const std::string& stage, double min_ordering) {
  if (min_ordering < -1e-10) {
    std::ostringstream os;
    os << stage << ": ordering v >= v_ violated by " << -min_ordering;
    r.warnings.push_back(os.str());
  }
}

struct Stage1Data {
  VectorXd c;  // G[v_]/xi(v_) per interior node
  double epsilon = 0.0;
};

Stage1Data stage1_data(const GraphField& lower, const Background& bg, int xi_K, int k,
                       std::optional<double> eps_in) {
  const Grid& grid = *lower.grid;
  Stage1Data d;
  VectorXd G;
  try {
    G = operator_values(grid, lower.values, bg, k);
  } catch (const Error& e) {
    throw AdmissibilityError(std::string("subsolution is not admissible: ") + e.what());
  }
  d.c.resize(G.size());
  for (std::size_t row = 0; row < grid.interior().size(); ++row) {
    const double v = lower.values(grid.interior()[row]);
    d.c(static_cast<Eigen::Index>(row)) = G(static_cast<Eigen::Index>(row)) / xi_dual(xi_K, Dual(v)).value();
  }
  const double cmin = d.c.size() ? d.c.minCoeff() : 1.0;
  d.epsilon = eps_in ? *eps_in : 0.5 * cmin;
  if (!(d.epsilon > 0.0) || !(1.2 * d.epsilon <= cmin)) {
    std::ostringstream os;
    os << "epsilon = " << d.epsilon << " violates G[v_] > 1.2 epsilon xi(v_) (min G/xi = " << cmin << ")";
    throw DomainError(os.str());
  }
  return d;
}

std::function<Equation(double)> stage1_family(const chart::GridPtr& grid, const Background& bg, int xi_K, int k,
                                              const Stage1Data& d) {
  return [grid, bg, xi_K, k, d](double t) {
    RhsFn rhs = [grid, xi_K, d, t](int node, const Dual& v, const std::vector<Dual>&) {
      const double c = d.c(grid->unknown_index(node));
      return ((1.0 - t) * c + t * d.epsilon) * xi_dual(xi_K, v);
    };
    return Equation{bg, k, rhs};
  };
}

// Stage 1 from `lower` in background bg with weight xi of xi_K.
SolveReport run_stage1(const std::string& stage, const GraphField& lower, const Background& bg, int xi_K, int k,
                       std::optional<double> eps_in, const HomotopyConfig& cfg, double theta_N) {
  SolveReport r;
  const auto d = stage1_data(lower, bg, xi_K, k, eps_in);
  r.constants["epsilon"] = d.epsilon;
  r.constants["min_G_over_xi"] = d.c.size() ? d.c.minCoeff() : 0.0;
  const auto family = stage1_family(lower.grid, bg, xi_K, k, d);
  const auto path = continue_path(stage, family, lower, &lower, cfg, k, theta_N);
  append(r, path);
  r.handoff[stage] = path.handoff_residual;
  r.status = path.status;
  r.message = path.message;
  r.solution = as_field(lower.grid, path.values);
  r.residual = path.trace.empty() ? kInf : path.trace.back().residual;
  ordering_warning(r, stage, path.min_ordering);
  for (const auto& tp : path.trace)
    if (tp.max_zero_order >= 0.0) {
      std::ostringstream os;
      os << stage << ": zero-order coefficient G_v - rhs_v = " << tp.max_zero_order << " >= 0 at t = " << tp.t;
      r.warnings.push_back(os.str());
      break;
    }
  if (r.status != Status::Converged || !cfg.uniqueness_probe) return r;

  for (const auto& [t, sol] : path.checkpoints) {
    UniquenessProbe probe;
    probe.t = t;
    const Equation eq = family(t);
    auto second = newton_solve(eq, as_field(lower.grid, path.values), cfg.newton);
    if (second.status != Status::Converged) second = newton_solve(eq, lower, cfg.newton);
    probe.converged = second.status == Status::Converged;
    probe.sup_difference = probe.converged ? sup_interior_difference(*lower.grid, second.values, sol) : kInf;
    r.uniqueness.push_back(probe);
  }
  return r;
}

void finish_report(SolveReport& r, const ProblemSpec& spec, const GraphField& lower) {
  if (r.status != Status::Converged) return;
  boundary_diagnostics(r, *spec.grid, r.solution.values, lower.values);
  try {
    r.sigma_residual = sigma_residual(spec, r.solution);
  } catch (const Error& e) {
    r.sigma_residual = kInf;
    r.warnings.push_back(std::string("sigma residual: ") + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec

ProblemSpec make_spec(const problem::ProblemFile& file, const std::string& base_dir, double h_override) {
  ProblemSpec spec;
  spec.sf = spaceform::SpaceFormParams::make(file.space_form);
  spec.k = file.k;
  spec.rep = chart::representation_from_string(file.representation);
  spec.theta_N = file.theta_N;
  const int n = file.n;
  const double h = h_override > 0.0 ? h_override : file.h;
  if (!(h > 0.0)) throw DomainError("grid spacing h must be positive");

  chart::Chart ch = chart::Chart::gnomonic(n);
  if (file.chart == "plane") {
    ch = chart::Chart::plane_minus_one(n);
  } else if (!file.center.empty()) {
    VectorXd c(n + 1);
    for (int i = 0; i <= n; ++i) c(i) = file.center[static_cast<std::size_t>(i)];
    if (!(c.norm() > 0.0)) throw DomainError("chart center must be nonzero");
    ch = chart::Chart::gnomonic(n, c.normalized());
  }
  if (file.domain_kind == "mask") {
    spec.grid = chart::build_from_mask(read_mask(resolve(base_dir, file.mask), n), h, ch);
  } else {
    spec.grid = chart::build_cap_domain(file.theta0, h, ch);
  }

  const expr::Symbols sym{n, rep_var(spec.rep)};
  spec.psi = expr::Expression::parse(file.psi, sym);
  spec.boundary = expr::Expression::parse(file.boundary, sym);
  if (!file.exact.empty()) spec.exact = expr::Expression::parse(file.exact, sym);
  spec.subsolution = chart::make_field(spec.grid, spec.rep);
  spec.subsolution.values = build_subsolution(file, spec, base_dir);
  return spec;
}

VectorXd boundary_values(const ProblemSpec& spec) {
  const Grid& grid = *spec.grid;
  VectorXd out = VectorXd::Constant(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (int node : grid.boundary()) out(node) = spec.boundary.eval(position_vars(spec.boundary.symbols(), grid, node));
  return out;
}

std::optional<GraphField> exact_field(const ProblemSpec& spec) {
  if (!spec.exact) return std::nullopt;
  GraphField f = chart::make_field(spec.grid, spec.rep);
  f.values = eval_position(*spec.exact, *spec.grid);
  return f;
}

Background solver_background(const ProblemSpec& spec) {
  if (spec.sf.K == 1) return Background::deformed(1.0);
  return Background::space_form(spec.sf.K);
}

GraphField to_solver(const ProblemSpec& spec, const GraphField& user) {
  const auto bg = solver_background(spec);
  GraphField out = chart::make_field(user.grid, Representation::V);
  for (int id = 0; id < user.grid->size(); ++id) {
    const double u = user_to_u(spec.sf, user.rep, user.values(id));
    if (!bg.u_admissible(u)) throw DomainError("field value outside the admissible range at node " + std::to_string(id));
    out.values(id) = bg.eta_inverse(u);
  }
  return out;
}

GraphField to_user(const ProblemSpec& spec, const GraphField& v, Representation rep) {
  const auto bg = solver_background(spec);
  GraphField out = chart::make_field(v.grid, rep);
  for (int id = 0; id < v.grid->size(); ++id) out.values(id) = u_to_user(spec.sf, rep, bg.eta(v.values(id)));
  return out;
}

RhsFn psi_rhs(const ProblemSpec& spec, const Background& bg) {
  const auto grid = spec.grid;
  const auto psi = spec.psi;
  const auto sym = psi.symbols();
  const int K = spec.sf.K;
  const Representation rep = spec.rep;
  const double inv_k = 1.0 / spec.k;
  return [grid, psi, sym, K, rep, inv_k, bg](int node, const Dual& v, const std::vector<Dual>& grad) {
    const auto& pg = grid->geometry(node);
    const int n = sym.n;
    std::vector<Dual> vars(static_cast<std::size_t>(sym.count()), Dual(0.0));
    for (int i = 0; i < n; ++i) vars[static_cast<std::size_t>(sym.y(i))] = pg.y(i);
    for (int i = 0; i <= n; ++i) vars[static_cast<std::size_t>(sym.z(i))] = pg.z(i);

    const Dual u = spaceform::detail::eta(bg.eta_K, v);
    const Dual du = spaceform::detail::eta_prime(bg.eta_K, v);
    std::vector<Dual> ui(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ui[static_cast<std::size_t>(i)] = du * grad[static_cast<std::size_t>(i)];
    const Dual s = u * u + Dual(bg.c);

    Dual x;
    Dual dx;
    switch (rep) {
      case Representation::Rho:
        x = bg.is_deformed() ? spaceform::detail::zeta_t(bg.t, u) : spaceform::detail::zeta(K, u);
        dx = -1.0 / s;
        break;
      case Representation::V:
        x = spaceform::detail::eta_inverse(K, u);
        dx = 1.0 / sqrt(u * u + Dual(static_cast<double>(K)));
        break;
      default:
        x = u;
        dx = 1.0;
    }
    vars[static_cast<std::size_t>(sym.rep_var())] = x;

    Dual g2(0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g2 += pg.metric.sigma_inv(i, j) * ui[static_cast<std::size_t>(i)] * ui[static_cast<std::size_t>(j)];
    for (int i = 0; i < n; ++i) vars[static_cast<std::size_t>(sym.p(i))] = dx * ui[static_cast<std::size_t>(i)];
    vars[static_cast<std::size_t>(sym.gradnorm())] = safe_sqrt(dx * dx * g2);
    const Dual W = sqrt(s + g2);
    vars[static_cast<std::size_t>(sym.nu_rad())] = sqrt(s) / W;
    for (int i = 0; i < n; ++i) {
      Dual pi(0.0);
      for (int j = 0; j < n; ++j) pi += pg.frame(i, j) * ui[static_cast<std::size_t>(j)];
      vars[static_cast<std::size_t>(sym.nu_tan(i))] = pi / W;
    }
    const Dual val = psi.eval(vars);
    if (!(val.value() > 0.0)) throw AdmissibilityError("psi is not positive", node);
    return pow(val, Dual(inv_k));
  };
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Converged:
      return "Converged";
    case Status::StepFailure:
      return "StepFailure";
    case Status::AdmissibilityLoss:
      return "AdmissibilityLoss";
    default:
      return "MaxIterations";
  }
}

// ---------------------------------------------------------------------------
// Newton

Evaluation evaluate(const Equation& eq, const Grid& grid, const VectorXd& v, double min_convexity) {
  return sweep(eq, grid, v, min_convexity, false).eval;
}

NewtonResult newton_solve(const Equation& eq, const GraphField& initial, const NewtonOptions& o) {
  const Grid& grid = *initial.grid;
  const auto& interior = grid.interior();
  NewtonResult res;
  res.values = initial.values;
  Sweep cur = sweep(eq, grid, res.values, o.min_convexity, true);
  if (!cur.eval.admissible) {
    res.status = Status::AdmissibilityLoss;
    res.worst_node = cur.eval.bad_node;
    res.residual = kInf;
    res.message = "initial iterate is not admissible: " + cur.failure;
    return res;
  }
  res.history.push_back(cur.eval.sup);
  while (true) {
    res.residual = cur.eval.sup;
    res.max_zero_order = cur.max_zero_order;
    if (cur.eval.sup <= o.tol) {
      res.status = Status::Converged;
      return res;
    }
    if (res.iterations >= o.max_iter) {
      res.status = Status::MaxIterations;
      std::ostringstream os;
      os << "no convergence in " << o.max_iter << " iterations (residual " << cur.eval.sup << ")";
      res.message = os.str();
      return res;
    }
    VectorXd delta;
    try {
      delta = linearization::solve(linearization::assemble_system(grid, cur.coeffs, cur.eval.residual));
    } catch (const AssemblyError& e) {
      res.status = Status::StepFailure;
      res.message = e.what();
      return res;
    }

    double lambda = 1.0;
    bool accepted = false;
    bool inadmissible = false;
    Sweep trial;
    VectorXd tv = res.values;
    for (int halving = 0; halving <= o.max_halvings; ++halving, lambda *= 0.5) {
      tv = res.values;
      for (std::size_t row = 0; row < interior.size(); ++row)
        tv(interior[row]) += lambda * delta(static_cast<Eigen::Index>(row));
      trial = sweep(eq, grid, tv, o.min_convexity, true);
      inadmissible = !trial.eval.admissible;
      if (inadmissible) continue;
      if (trial.eval.sup <= o.tol || trial.eval.l2sq <= (1.0 - 2.0 * o.armijo * lambda) * cur.eval.l2sq) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.status = inadmissible ? Status::AdmissibilityLoss : Status::StepFailure;
      res.worst_node = trial.eval.bad_node;
      std::ostringstream os;
      os << "line search failed after " << o.max_halvings << " halvings (residual " << cur.eval.sup << ")";
      if (inadmissible) os << ": " << trial.failure;
      res.message = os.str();
      return res;
    }
    res.values = tv;
    cur = std::move(trial);
    ++res.iterations;
    res.history.push_back(cur.eval.sup);
  }
}

// ---------------------------------------------------------------------------
// Continuation

HomotopyConfig config_from(const problem::ProblemFile& file) {
  HomotopyConfig c;
  c.epsilon = file.epsilon;
  c.delta1 = file.delta1;
  c.delta2 = file.delta2;
  c.t_exponent = file.t_exponent;
  c.dt_initial = file.dt_initial;
  c.dt_min = file.dt_min;
  c.dt_max = file.dt_max;
  c.halving = file.halving;
  c.eps_target = file.eps_target;
  c.newton.tol = file.tol;
  c.newton.max_iter = file.max_newton;
  c.newton.min_convexity = file.min_convexity;
  return c;
}

PathResult continue_path(const std::string& stage, const std::function<Equation(double)>& family,
                         const GraphField& start, const GraphField* lower, const HomotopyConfig& cfg, int diag_k,
                         double theta_N) {
  PathResult out;
  const auto grid = start.grid;
  out.min_ordering = lower ? min_interior_difference(*grid, start.values, lower->values) : 0.0;
  diagnostics::DiagnosticsOptions dopt;
  dopt.N = theta_N;
  dopt.k = diag_k;

  auto record = [&](double t, double dt, const Equation& eq, const NewtonResult& nr) {
    TracePoint tp;
    tp.stage = stage;
    tp.t = t;
    tp.dt = dt;
    tp.iterations = nr.iterations;
    tp.residual = nr.residual;
    tp.max_zero_order = nr.max_zero_order;
    tp.min_ordering = lower ? min_interior_difference(*grid, nr.values, lower->values) : 0.0;
    tp.diag = diagnostics::diagnostics_monitor(as_field(grid, nr.values), eq.bg, dopt);
    out.min_ordering = std::min(out.min_ordering, tp.min_ordering);
    out.all_admissible = out.all_admissible && tp.diag.all_admissible;
    out.trace.push_back(tp);
  };

  const Equation eq0 = family(0.0);
  NewtonResult nr = newton_solve(eq0, start, cfg.newton);
  out.handoff_residual = nr.history.empty() ? kInf : nr.history.front();
  if (nr.status != Status::Converged) {
    out.status = nr.status;
    out.message = stage + " at t = 0: " + nr.message;
    out.values = start.values;
    return out;
  }
  record(0.0, 0.0, eq0, nr);
  VectorXd v = nr.values;

  std::vector<double> marks;
  for (double c : cfg.checkpoints)
    if (c > 0.0 && c < 1.0) marks.push_back(c);
  std::sort(marks.begin(), marks.end());

  double t = 0.0;
  double dt = cfg.dt_initial;
  bool perturbed = false;
  std::mt19937 rng(cfg.seed);
  while (t < 1.0) {
    double tn = std::min(1.0, t + dt);
    for (double m : marks)
      if (m > t + 1e-14 && m < tn) {
        tn = m;
        break;
      }
    const Equation eq = family(tn);
    nr = newton_solve(eq, as_field(grid, v), cfg.newton);
    if (nr.status == Status::Converged) {
      t = tn;
      v = nr.values;
      record(t, tn - (out.trace.empty() ? 0.0 : out.trace.back().t), eq, nr);
      for (double m : marks)
        if (std::abs(m - t) < 1e-14) out.checkpoints[m] = v;
      if (nr.iterations <= cfg.easy_iterations) dt = std::min(cfg.dt_max, dt * cfg.growth);
      continue;
    }
    dt *= cfg.halving;
    if (dt >= cfg.dt_min) continue;
    if (!perturbed) {
      perturbed = true;
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (int node : grid->interior()) v(node) += 1e-8 * dist(rng);
      dt = cfg.dt_min;
      continue;
    }
    out.status = nr.status == Status::AdmissibilityLoss ? Status::AdmissibilityLoss : Status::StepFailure;
    std::ostringstream os;
    os << stage << ": step below dt_min at t = " << t << " (" << nr.message << ")";
    out.message = os.str();
    out.values = v;
    return out;
  }
  out.values = v;
  return out;
}

SubsolutionReport verify_subsolution(const ProblemSpec& spec, double tol) {
  SubsolutionReport r;
  const Grid& grid = *spec.grid;
  GraphField lower;
  try {
    lower = to_solver(spec, spec.subsolution);
  } catch (const Error& e) {
    r.ok = false;
    r.status = Status::AdmissibilityLoss;
    r.message = e.what();
    return r;
  }
  const auto eq = target_equation(spec);
  r.min_convexity = kInf;
  r.inequality_margin = kInf;
  for (int node : grid.interior()) {
    try {
      const auto& pg = grid.geometry(node);
      const chart::Jet j = chart::jet(lower, node);
      const auto st = curvature::geometry_v(curvature::frame_jet(j, pg), eq.bg);
      const double ev = min_eigenvalue(st.convexity);
      if (ev < r.min_convexity) {
        r.min_convexity = ev;
        r.convexity_node = node;
      }
      if (!(ev > 0.0) || !curvature::cone_check(st.kappa, spec.k).in_gamma_k) continue;
      std::vector<Dual> grad(static_cast<std::size_t>(grid.dim()));
      for (int i = 0; i < grid.dim(); ++i) grad[static_cast<std::size_t>(i)] = Dual(j.grad(i));
      const double margin =
          curvature::f_and_derivatives(st.kappa, spec.k).f - eq.rhs(node, Dual(j.value), grad).value();
      if (margin < r.inequality_margin) {
        r.inequality_margin = margin;
        r.inequality_node = node;
      }
    } catch (const Error& e) {
      r.ok = false;
      r.status = Status::AdmissibilityLoss;
      r.convexity_node = node;
      r.message = e.what();
      return r;
    }
  }
  const VectorXd b = boundary_values(spec);
  for (int node : grid.boundary()) {
    const double d = std::abs(spec.subsolution.values(node) - b(node));
    if (d > r.boundary_mismatch || r.boundary_node < 0) {
      r.boundary_mismatch = std::max(r.boundary_mismatch, d);
      r.boundary_node = node;
    }
  }
  std::ostringstream os;
  if (!(r.min_convexity >= 1e-10)) {
    r.ok = false;
    r.status = Status::AdmissibilityLoss;
    os << "subsolution is not strictly locally convex at node " << r.convexity_node
       << " (min eigenvalue " << r.min_convexity << ")";
  } else if (r.inequality_margin < -tol) {
    r.ok = false;
    os << "subsolution inequality fails at node " << r.inequality_node << " (G - psi = " << r.inequality_margin
       << ")";
  } else if (r.boundary_mismatch > tol) {
    r.ok = false;
    os << "subsolution differs from the boundary data at node " << r.boundary_node << " by " << r.boundary_mismatch;
  }
  r.message = os.str();
  return r;
}

SolveReport stage1_path(const ProblemSpec& spec, const HomotopyConfig& cfg) {
  if (spec.sf.K == 1) throw UnsupportedError("stage 1 needs K = 0 or K = -1");
  require_gauss(spec);
  const GraphField lower = solver_lower(spec);
  SolveReport r = run_stage1("stage1", lower, solver_background(spec), spec.sf.K, spec.k, cfg.epsilon, cfg,
                             spec.theta_N);
  r.min_ordering = std::min(r.min_ordering, 0.0);
  return r;
}

SolveReport stage2_path(const ProblemSpec& spec, const HomotopyConfig& cfg, const GraphField& v0) {
  if (spec.sf.K == 1) throw UnsupportedError("stage 2 needs K = 0 or K = -1");
  require_gauss(spec);
  const GraphField lower = solver_lower(spec);
  const auto bg = solver_background(spec);
  const auto d = stage1_data(lower, bg, spec.sf.K, spec.k, cfg.epsilon);
  const RhsFn psi = psi_rhs(spec, bg);
  const int K = spec.sf.K;
  const double eps = d.epsilon;
  const int k = spec.k;
  auto family = [bg, psi, K, eps, k](double t) {
    RhsFn rhs = [psi, K, eps, t](int node, const Dual& v, const std::vector<Dual>& grad) {
      Dual out = (1.0 - t) * eps * xi_dual(K, v);
      if (t > 0.0) out += t * psi(node, v, grad);
      return out;
    };
    return Equation{bg, k, rhs};
  };
  HomotopyConfig c2 = cfg;
  c2.checkpoints.clear();
  const auto path = continue_path("stage2", family, v0, &lower, c2, spec.k, spec.theta_N);
  SolveReport r;
  r.constants["epsilon"] = eps;
  append(r, path);
  r.handoff["stage2"] = path.handoff_residual;
  r.status = path.status;
  r.message = path.message;
  r.solution = as_field(spec.grid, path.values);
  r.residual = path.trace.empty() ? kInf : path.trace.back().residual;
  ordering_warning(r, "stage2", path.min_ordering);
  finish_report(r, spec, lower);
  return r;
}

SolveReport two_stage_solve(const ProblemSpec& spec, const HomotopyConfig& cfg) {
  SolveReport r = stage1_path(spec, cfg);
  if (r.status != Status::Converged) return r;
  SolveReport r2 = stage2_path(spec, cfg, r.solution);
  r.trace.insert(r.trace.end(), r2.trace.begin(), r2.trace.end());
  r.warnings.insert(r.warnings.end(), r2.warnings.begin(), r2.warnings.end());
  r.handoff.insert(r2.handoff.begin(), r2.handoff.end());
  r.all_admissible = r.all_admissible && r2.all_admissible;
  r.min_ordering = std::min(r.min_ordering, r2.min_ordering);
  r.status = r2.status;
  r.message = r2.message;
  r.residual = r2.residual;
  r.sigma_residual = r2.sigma_residual;
  r.min_hopf = r2.min_hopf;
  r.max_interior_gap = r2.max_interior_gap;
  r.solution = r2.solution;
  return r;
}

SolveReport sphere_path(const ProblemSpec& spec, const HomotopyConfig& cfg) {
  if (spec.sf.K != 1) throw UnsupportedError("the sphere path needs K = 1");
  require_gauss(spec);
  const Grid& grid = *spec.grid;
  const GraphField lower = solver_lower(spec);
  const int k = spec.k;
  SolveReport r;

  // Margins of the subsolution on 33 t-samples.
  constexpr int kSamples = 33;
  std::vector<double> ts(kSamples);
  for (int i = 0; i < kSamples; ++i) ts[static_cast<std::size_t>(i)] = static_cast<double>(i) / (kSamples - 1);
  auto G_at = [&](double t) {
    try {
      return operator_values(grid, lower.values, Background::deformed(t), k);
    } catch (const Error& e) {
      throw AdmissibilityError(std::string("subsolution is not admissible in the deformed geometry: ") + e.what());
    }
  };
  auto psi_at = [&](double t) { return rhs_values(grid, lower.values, psi_rhs(spec, Background::deformed(t))); };
  const VectorXd G0 = G_at(0.0);
  const double minG0 = G0.minCoeff();
  double min_psi = kInf;
  double max_psi = -kInf;
  for (double t : ts) {
    const VectorXd p = psi_at(t);
    min_psi = std::min(min_psi, p.minCoeff());
    max_psi = std::max(max_psi, p.maxCoeff());
  }
  const double eps = cfg.epsilon ? *cfg.epsilon : 0.5 * std::min(minG0, 0.5 * min_psi);
  if (!(eps > 0.0)) throw DomainError("sphere path: epsilon must be positive");

  auto inequality_margin = [&](double d1) {
    double m = kInf;
    std::vector<double> sample{1.0 - d1};
    for (double t : ts)
      if (t >= 1.0 - d1) sample.push_back(t);
    for (double t : sample) m = std::min(m, (G_at(t) - psi_at(t)).minCoeff() + 0.5 * eps);
    return m;
  };
  double delta1 = 0.0;
  if (cfg.delta1) {
    delta1 = *cfg.delta1;
  } else {
    for (double d1 : {0.5, 0.25, 0.1, 0.05, 0.025, 0.01, 0.005, 0.0025, 0.001})
      if (inequality_margin(d1) >= 0.1 * 0.5 * eps) {
        delta1 = d1;
        break;
      }
    if (delta1 == 0.0)
      throw DomainError("sphere path: the subsolution misses G^t > psi^t - eps/2 near t = 1 for every delta1 tried");
  }
  const double margin73 = inequality_margin(delta1);

  double max_u2 = 0.0;
  for (int id = 0; id < grid.size(); ++id) max_u2 = std::max(max_u2, std::exp(2.0 * lower.values(id)));
  const double delta2 = cfg.delta2 ? *cfg.delta2 : eps / (4.0 * max_u2);
  if (!(delta2 * max_u2 < 0.5 * eps)) throw DomainError("sphere path: delta2 max u_^2 < eps/2 fails");

  int m = 1;
  if (cfg.t_exponent) {
    m = *cfg.t_exponent;
  } else {
    while (m < 1000 && !(minG0 > 2.0 * std::pow(1.0 - delta1, m) * max_psi)) ++m;
  }
  const double T_margin = minG0 - 2.0 * std::pow(1.0 - delta1, m) * max_psi;
  if (!(T_margin > 0.0)) throw DomainError("sphere path: no T = t^m satisfies min G0 > 2 T(1 - delta1) max psi^t");

  r.constants["epsilon"] = eps;
  r.constants["delta1"] = delta1;
  r.constants["delta2"] = delta2;
  r.constants["t_exponent"] = m;
  r.constants["T_margin"] = T_margin;
  r.constants["inequality_margin"] = margin73;
  r.constants["min_G0"] = minG0;
  r.constants["max_psi_t"] = max_psi;

  // t = 0: the Euclidean auxiliary problem G0[v] = delta2 e^{2v}.
  HomotopyConfig c0 = cfg;
  c0.uniqueness_probe = false;
  SolveReport r0 = run_stage1("sphere_t0", lower, Background::space_form(0), 0, k, delta2, c0, spec.theta_N);
  r.trace = r0.trace;
  r.handoff = r0.handoff;
  r.warnings = r0.warnings;
  r.all_admissible = r0.all_admissible;
  r.min_ordering = std::min(0.0, r0.min_ordering);
  if (r0.status != Status::Converged) {
    r.status = r0.status;
    r.message = r0.message;
    r.solution = r0.solution;
    return r;
  }

  const auto spec_ptr = &spec;
  auto family = [spec_ptr, delta2, eps, m, k](double t) {
    const Background bg = Background::deformed(t);
    const double T = std::pow(t, m);
    const RhsFn psi = psi_rhs(*spec_ptr, bg);
    RhsFn rhs = [psi, T, delta2, eps](int node, const Dual& v, const std::vector<Dual>& grad) {
      Dual out = (1.0 - T) * delta2 * exp(2.0 * v);
      if (T > 0.0) out += T * (psi(node, v, grad) - eps);
      return out;
    };
    return Equation{bg, k, rhs};
  };
  HomotopyConfig c1 = cfg;
  c1.checkpoints.clear();
  const auto path = continue_path("sphere", family, r0.solution, &lower, c1, k, spec.theta_N);
  append(r, path);
  r.handoff["sphere"] = path.handoff_residual;
  r.solution = as_field(spec.grid, path.values);
  r.residual = path.trace.empty() ? kInf : path.trace.back().residual;
  if (path.status != Status::Converged) {
    r.status = path.status;
    r.message = path.message;
    return r;
  }

  // Approximation: G[v] = psi - eps_j with eps_j = eps 2^{-j}.
  const Background bg1 = Background::deformed(1.0);
  const RhsFn psi1 = psi_rhs(spec, bg1);
  const double target = cfg.eps_target * rhs_values(grid, path.values, psi1).minCoeff();
  auto eps_equation = [bg1, psi1, k](double e) {
    RhsFn rhs = [psi1, e](int node, const Dual& v, const std::vector<Dual>& grad) { return psi1(node, v, grad) - e; };
    return Equation{bg1, k, rhs};
  };
  VectorXd v = path.values;
  double eps_prev = eps;
  double max_increase = 0.0;
  r.handoff["eps_schedule"] = evaluate(eps_equation(eps), grid, v, cfg.newton.min_convexity).sup;
  diagnostics::DiagnosticsOptions dopt;
  dopt.N = spec.theta_N;
  dopt.k = k;
  for (int j = 1; eps_prev > target && j < 200; ++j) {
    const double e = eps * std::ldexp(1.0, -j);
    const Equation eq = eps_equation(e);
    NewtonResult nr = newton_solve(eq, as_field(spec.grid, v), cfg.newton);
    VectorXd next;
    int iterations = nr.iterations;
    double residual = nr.residual;
    double zero_order = nr.max_zero_order;
    if (nr.status == Status::Converged) {
      next = nr.values;
    } else {
      const double ep = eps_prev;
      auto sub = [&eps_equation, ep, e](double s) { return eps_equation(ep + s * (e - ep)); };
      HomotopyConfig cs = cfg;
      cs.checkpoints.clear();
      const auto sp = continue_path("eps_substeps", sub, as_field(spec.grid, v), &lower, cs, k, spec.theta_N);
      if (sp.status != Status::Converged) {
        r.status = sp.status;
        std::ostringstream os;
        os << "eps schedule stalled at eps = " << e << ": " << sp.message;
        r.message = os.str();
        r.solution = as_field(spec.grid, v);
        return r;
      }
      next = sp.values;
      iterations = 0;
      for (const auto& tp : sp.trace) iterations += tp.iterations;
      residual = sp.trace.back().residual;
      zero_order = sp.trace.back().max_zero_order;
    }
    // u_{eps_j} against u_{eps_{j-1}}; u = e^v.
    for (int node : grid.interior())
      max_increase = std::max(max_increase, std::exp(next(node)) - std::exp(v(node)));
    v = next;
    eps_prev = e;
    TracePoint tp;
    tp.stage = "eps";
    tp.t = e;
    tp.iterations = iterations;
    tp.residual = residual;
    tp.max_zero_order = zero_order;
    tp.min_ordering = min_interior_difference(grid, v, lower.values);
    tp.diag = diagnostics::diagnostics_monitor(as_field(spec.grid, v), bg1, dopt);
    r.all_admissible = r.all_admissible && tp.diag.all_admissible;
    r.min_ordering = std::min(r.min_ordering, tp.min_ordering);
    r.trace.push_back(tp);
    r.residual = residual;
  }
  r.constants["eps_final"] = eps_prev;
  r.constants["eps_target"] = target;
  r.constants["eps_max_increase"] = max_increase;
  if (max_increase > 1e-9) {
    std::ostringstream os;
    os << "eps schedule: u_eps is not monotone in j (max increase " << max_increase << ")";
    r.warnings.push_back(os.str());
  }
  r.status = Status::Converged;
  r.solution = as_field(spec.grid, v);
  finish_report(r, spec, lower);
  return r;
}

SolveReport solve(const ProblemSpec& spec, const HomotopyConfig& cfg, const std::string& method) {
  const auto check = verify_subsolution(spec);
  if (method == "newton") {
    SolveReport r;
    if (!check.ok) r.warnings.push_back("subsolution check: " + check.message);
    const GraphField lower = solver_lower(spec);
    const Equation eq = target_equation(spec);
    const auto nr = newton_solve(eq, lower, cfg.newton);
    r.status = nr.status;
    r.message = nr.message;
    r.residual = nr.residual;
    r.handoff["newton"] = nr.history.empty() ? kInf : nr.history.front();
    r.solution = as_field(spec.grid, nr.values);
    TracePoint tp;
    tp.stage = "newton";
    tp.t = 1.0;
    tp.iterations = nr.iterations;
    tp.residual = nr.residual;
    tp.max_zero_order = nr.max_zero_order;
    tp.min_ordering = min_interior_difference(*spec.grid, nr.values, lower.values);
    if (nr.status == Status::Converged) {
      diagnostics::DiagnosticsOptions dopt;
      dopt.N = spec.theta_N;
      dopt.k = spec.k;
      tp.diag = diagnostics::diagnostics_monitor(r.solution, eq.bg, dopt);
      r.all_admissible = tp.diag.all_admissible;
    }
    r.trace.push_back(tp);
    finish_report(r, spec, lower);
    return r;
  }
  if (!check.ok) {
    SolveReport r;
    r.status = check.status == Status::AdmissibilityLoss ? Status::AdmissibilityLoss : Status::StepFailure;
    r.message = "subsolution rejected: " + check.message;
    r.all_admissible = check.status != Status::AdmissibilityLoss;
    r.solution = chart::make_field(spec.grid, Representation::V);
    return r;
  }
  if (method == "sphere" || (method == "auto" && spec.sf.K == 1)) return sphere_path(spec, cfg);
  return two_stage_solve(spec, cfg);
}

VectorXd sigma_residuals(const ProblemSpec& spec, const GraphField& v) {
  const auto eq = target_equation(spec);
  const Grid& grid = *spec.grid;
  VectorXd out(static_cast<Eigen::Index>(grid.interior().size()));
  for (std::size_t row = 0; row < grid.interior().size(); ++row) {
    const int node = grid.interior()[row];
    const auto& pg = grid.geometry(node);
    const chart::Jet j = chart::jet(grid, v.values, node);
    const auto st = curvature::geometry_v(curvature::frame_jet(j, pg), eq.bg);
    std::vector<Dual> grad(static_cast<std::size_t>(grid.dim()));
    for (int i = 0; i < grid.dim(); ++i) grad[static_cast<std::size_t>(i)] = Dual(j.grad(i));
    const double psi = std::pow(eq.rhs(node, Dual(j.value), grad).value(), spec.k);
    out(static_cast<Eigen::Index>(row)) = curvature::sigma_k(st.kappa, spec.k) - psi;
  }
  return out;
}

double sigma_residual(const ProblemSpec& spec, const GraphField& v) {
  const VectorXd r = sigma_residuals(spec, v);
  return r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const SolveReport& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& tp : r.trace)
    trace.push_back({{"stage", tp.stage},
                     {"t", tp.t},
                     {"dt", tp.dt},
                     {"iterations", tp.iterations},
                     {"residual", tp.residual},
                     {"min_ordering", tp.min_ordering},
                     {"max_zero_order", tp.max_zero_order},
                     {"diagnostics", diagnostics::to_json(tp.diag)}});
  nlohmann::json uniq = nlohmann::json::array();
  for (const auto& u : r.uniqueness)
    uniq.push_back({{"t", u.t}, {"sup_difference", u.sup_difference}, {"converged", u.converged}});
  return {{"status", to_string(r.status)},
          {"message", r.message},
          {"residual", r.residual},
          {"sigma_residual", r.sigma_residual},
          {"trace", trace},
          {"uniqueness", uniq},
          {"warnings", r.warnings},
          {"constants", r.constants},
          {"handoff", r.handoff},
          {"min_ordering", r.min_ordering},
          {"min_hopf", r.min_hopf},
          {"max_interior_gap", r.max_interior_gap},
          {"all_admissible", r.all_admissible}};
}

nlohmann::json to_json(const SubsolutionReport& r) {
  return {{"ok", r.ok},
          {"status", to_string(r.status)},
          {"min_convexity", r.min_convexity},
          {"convexity_node", r.convexity_node},
          {"inequality_margin", r.inequality_margin},
          {"inequality_node", r.inequality_node},
          {"boundary_mismatch", r.boundary_mismatch},
          {"boundary_node", r.boundary_node},
          {"message", r.message}};
}

}  // namespace radgraph::continuity
