#include "radgraph/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "radgraph/errors.hpp"
#include "radgraph/small_linalg.hpp"

namespace radgraph::diagnostics {

namespace {

// max of u0 + g.x + x.H x / 2 over |x| <= r (trust-region subproblem, any symmetric H).
double quadratic_max_in_ball(double u0, const Eigen::VectorXd& g, const Eigen::MatrixXd& H, double r) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const Eigen::VectorXd lam = es.eigenvalues();
  const Eigen::VectorXd b = es.eigenvectors().transpose() * g;
  const double top = lam.maxCoeff();
  auto step = [&](double mu) {
    Eigen::VectorXd c(b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) c(i) = mu > lam(i) ? b(i) / (mu - lam(i)) : 0.0;
    return c;
  };
  Eigen::VectorXd c;
  if (top < 0.0 && step(0.0).norm() <= r) {
    c = step(0.0);
  } else {
    const double lo0 = std::max(top, 0.0);
    double lo = lo0, hi = lo0 + g.norm() / r + 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (step(mid).norm() > r ? lo : hi) = mid;
    }
    c = step(hi);
    if (c.norm() < r * (1.0 - 1e-12)) {
      // Hard case: complete along the top eigenvector.
      Eigen::Index k;
      lam.maxCoeff(&k);
      c = step(lo0);
      c(k) += std::sqrt(std::max(0.0, r * r - c.squaredNorm()));
    }
  }
  return u0 + b.dot(c) + 0.5 * c.dot(lam.cwiseProduct(c));
}

}  // namespace

DiagnosticsRecord diagnostics_monitor(const chart::GraphField& field, const curvature::Background& bg,
                                      const DiagnosticsOptions& opts) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  DiagnosticsRecord d;
  d.min_kappa = inf;
  d.max_kappa = -inf;
  d.min_convexity_det = inf;
  d.min_convexity_eig = inf;
  d.min_tau = inf;
  d.max_theta = -inf;
  d.min_u = inf;
  d.max_u = -inf;
  d.max_w_interior = -inf;
  d.max_w_trace = -inf;

  const auto& grid = *field.grid;
  const double beta = (!bg.is_deformed() && bg.K == -1) ? 1.0 : 0.0;
  std::vector<double> wn(static_cast<std::size_t>(grid.size()), std::numeric_limits<double>::quiet_NaN());

  for (int node : grid.interior()) {
    curvature::GeometryState s;
    try {
      s = curvature::geometry(field, node, bg);
    } catch (const DomainError&) {
      d.all_admissible = false;
      continue;
    }
    const double u = s.u.value;
    d.min_u = std::min(d.min_u, u);
    d.max_u = std::max(d.max_u, u);
    d.min_kappa = std::min(d.min_kappa, s.kappa.minCoeff());
    d.max_kappa = std::max(d.max_kappa, s.kappa.maxCoeff());
    d.min_convexity_det = std::min(d.min_convexity_det, s.convexity.determinant());
    d.min_convexity_eig = std::min(d.min_convexity_eig, min_eigenvalue(s.convexity));
    d.min_tau = std::min(d.min_tau, s.tau);
    if (!curvature::cone_check(s.kappa, opts.k).in_gamma_k || s.kappa.minCoeff() <= 0.0) d.all_admissible = false;

    double theta = 0.5 * std::log(s.kappa.squaredNorm()) - opts.N * std::log(s.tau);
    if (beta != 0.0) theta += beta * spaceform::capital_phi(spaceform::SpaceFormParams::make(bg.K), s.warp.rho);
    d.max_theta = std::max(d.max_theta, theta);

    const double w = std::sqrt(u * u + s.grad_norm_sq);
    d.max_w_interior = std::max(d.max_w_interior, w);
    wn[static_cast<std::size_t>(node)] = w;
  }

  // Boundary trace of w: the boundary-adjacent layer, plus linear extrapolation of w from the
  // two lattice nodes behind each boundary point.
  for (int id : grid.boundary_adjacent())
    if (std::isfinite(wn[static_cast<std::size_t>(id)])) d.max_w_trace = std::max(d.max_w_trace, wn[static_cast<std::size_t>(id)]);
  for (int b : grid.boundary()) {
    chart::Grid::BoundaryLink link;
    try {
      link = grid.boundary_link(b);
    } catch (const DomainError&) {
      continue;  // not reached by any stencil
    }
    if (link.owner < 0 || grid.node(link.owner).lattice.empty()) continue;
    const double scale = link.direction.cwiseAbs().maxCoeff();
    std::vector<int> behind = grid.node(link.owner).lattice;
    for (std::size_t i = 0; i < behind.size(); ++i)
      behind[i] -= static_cast<int>(std::lround(link.direction(static_cast<Eigen::Index>(i)) / scale));
    const int o2 = grid.lattice_node(behind);
    if (o2 < 0 || grid.unknown_index(o2) < 0) continue;
    const double w1 = wn[static_cast<std::size_t>(link.owner)];
    const double w2 = wn[static_cast<std::size_t>(o2)];
    if (!std::isfinite(w1) || !std::isfinite(w2)) continue;
    const double step = (grid.node(link.owner).y - grid.node(o2).y).norm();
    const double gap = (grid.node(b).y - grid.node(link.owner).y).norm();
    d.max_w_trace = std::max(d.max_w_trace, w1 + (w1 - w2) * gap / step);
  }
  // sup u over the continuum: quadratic model (covariant Hessian) at discrete interior
  // maxima of u, maximized within one grid spacing. Ring-shaped maxima give an indefinite
  // Hessian, hence the ball.
  chart::GraphField uf = chart::make_field(field.grid, chart::Representation::U);
  for (int id = 0; id < grid.size(); ++id) {
    const double x = field.values(id);
    switch (field.rep) {
      case chart::Representation::V:
        uf.values(id) = bg.eta(x);
        break;
      case chart::Representation::Rho:
        uf.values(id) = spaceform::zeta_inverse(spaceform::SpaceFormParams::make(bg.K), x);
        break;
      default:
        uf.values(id) = x;
    }
  }
  d.sup_u_estimate = d.max_u;
  for (int node : grid.interior()) {
    const double u0 = uf.values(node);
    bool is_max = true;
    for (const auto& pt : grid.stencil(node).points)
      if (uf.values(pt.node) > u0) is_max = false;
    if (!is_max) continue;
    d.sup_u_estimate = std::max(d.sup_u_estimate, quadratic_max_in_ball(u0, chart::gradient(uf, node),
                                                                         chart::covariant_hessian(uf, node),
                                                                         grid.spacing()));
  }
  d.c1_gap = d.max_w_interior - std::max(d.sup_u_estimate, d.max_w_trace);
  d.c1_ok = d.c1_gap <= 1e-8;
  return d;
}

nlohmann::json to_json(const DiagnosticsRecord& d) {
  return {{"min_kappa", d.min_kappa},
          {"max_kappa", d.max_kappa},
          {"min_convexity_det", d.min_convexity_det},
          {"min_convexity_eig", d.min_convexity_eig},
          {"min_tau", d.min_tau},
          {"max_theta", d.max_theta},
          {"min_u", d.min_u},
          {"max_u", d.max_u},
          {"sup_u_estimate", d.sup_u_estimate},
          {"max_w_interior", d.max_w_interior},
          {"max_w_trace", d.max_w_trace},
          {"c1_gap", d.c1_gap},
          {"c1_ok", d.c1_ok},
          {"all_admissible", d.all_admissible}};
}

}  // namespace radgraph::diagnostics
