#include "radgraph/linearization.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "radgraph/errors.hpp"
#include "radgraph/small_linalg.hpp"

namespace radgraph::linearization {

using curvature::Background;
using curvature::FrameJet;
using curvature::GeometryState;
using Eigen::MatrixXd;
using Eigen::VectorXd;

LinearizedCoefficients coefficients_u(const GeometryState& s, int k) {
  const auto F = curvature::F_matrix(s, k);
  const auto& wp = s.warp;
  const double phi = wp.phi;
  const double dphi = wp.dphi;
  const double dz = wp.dzeta;
  const double ddz = wp.ddzeta;
  const double w = s.w;
  const VectorXd& p = s.u.p;
  const MatrixXd Fa = F.F * s.a;
  const double trFa = Fa.trace();

  LinearizedCoefficients c;
  c.G = F.f;
  c.Gij = symmetrize((-phi * dz / w) * s.gamma_up * F.F * s.gamma_up);
  c.Gs = -(2.0 * dz * dz / (w * (phi + w))) *
             (w * s.gamma_up * F.F * s.a * p + phi * s.gamma_up * s.a * F.F * p) -
         (dz * dz / (w * w)) * trFa * p;
  const MatrixXd M2 = phi * dphi * dz * s.g_inv + (dz * ddz / (w * w)) * p * p.transpose();
  c.Gu = -2.0 * (M2 * Fa).trace() +
         (dphi * dz / phi - phi * dphi * dz / (w * w) + phi * phi * ddz / (dz * w * w)) * trFa -
         (phi * dz / w) * (F.F.cwiseProduct(s.g_inv)).sum();
  c.psi_s = VectorXd::Zero(p.size());
  c.psi_u = 0.0;
  return c;
}

namespace {

struct ChainParts {
  LinearizedCoefficients cu;
  double e1, e2, e3;
};

ChainParts chain_parts(const GeometryState& s, const FrameJet& v, const Background& bg, int k) {
  ChainParts parts{coefficients_u(s, k), bg.eta_prime(v.value), bg.eta_second(v.value), bg.eta_third(v.value)};
  return parts;
}

}  // namespace

double gv_chain_rule(const GeometryState& s, const FrameJet& v, const Background& bg, int k) {
  const auto cp = chain_parts(s, v, bg, k);
  const MatrixXd dr = cp.e2 * v.r + cp.e3 * v.p * v.p.transpose();
  return cp.e1 * cp.cu.Gu + cp.e2 * cp.cu.Gs.dot(v.p) + cp.cu.Gij.cwiseProduct(dr).sum();
}

double gv_closed_form(const GeometryState& s, const FrameJet& v, const Background& bg, int k) {
  if (bg.c != static_cast<double>(bg.eta_K))
    throw UnsupportedError("closed-form Gv needs the substitution of the background space form");
  const auto F = curvature::F_matrix(s, k);
  const double eta = bg.eta(v.value);
  const double e1 = bg.eta_prime(v.value);
  const double wt = std::sqrt(1.0 + v.p.squaredNorm());
  const double trFa = F.fi.dot(F.kappa);
  return bg.eta_K / (wt * e1) * F.fi.sum() + (eta / e1) * trFa;
}

LinearizedCoefficients coefficients_v(const GeometryState& s, const FrameJet& v, const Background& bg, int k) {
  const auto cp = chain_parts(s, v, bg, k);
  LinearizedCoefficients c;
  c.G = cp.cu.G;
  c.Gij = cp.e1 * cp.cu.Gij;
  c.Gs = cp.e1 * cp.cu.Gs + 2.0 * cp.e2 * cp.cu.Gij * v.p;
  if (bg.c == static_cast<double>(bg.eta_K)) {
    c.Gu = gv_closed_form(s, v, bg, k);
  } else {
    const MatrixXd dr = cp.e2 * v.r + cp.e3 * v.p * v.p.transpose();
    c.Gu = cp.e1 * cp.cu.Gu + cp.e2 * cp.cu.Gs.dot(v.p) + cp.cu.Gij.cwiseProduct(dr).sum();
  }
  c.psi_s = VectorXd::Zero(v.p.size());
  c.psi_u = 0.0;
  return c;
}

void set_rhs_derivatives(LinearizedCoefficients& c, double psi_u, const VectorXd& psi_grad_coord,
                         const chart::PointGeometry& g) {
  // p = M Dx, so d psi / d p = M^{-T} d psi / d(Dx); M is symmetric.
  c.psi_u = psi_u;
  c.psi_s = g.frame.ldlt().solve(psi_grad_coord);
}

CoordinateCoefficients to_coordinates(const LinearizedCoefficients& c, const chart::PointGeometry& g) {
  const MatrixXd& M = g.frame;
  const int n = static_cast<int>(M.rows());
  CoordinateCoefficients out;
  out.d_hess = symmetrize(M * c.Gij * M);
  const VectorXd s = c.Gs - c.psi_s;
  out.d_grad = M.transpose() * s;
  for (int k = 0; k < n; ++k) out.d_grad(k) -= out.d_hess.cwiseProduct(g.gamma[static_cast<std::size_t>(k)]).sum();
  out.d_u = c.Gu - c.psi_u;
  return out;
}

double operator_value(const FrameJet& x, chart::Representation rep, const Background& bg, int k) {
  GeometryState s;
  switch (rep) {
    case chart::Representation::U:
      s = curvature::geometry_u(x, bg);
      break;
    case chart::Representation::V:
      s = curvature::geometry_v(x, bg);
      break;
    default:
      s = curvature::geometry_u(curvature::u_jet_from_rho(x, bg.K), bg);
  }
  return curvature::f_and_derivatives(s.kappa, k).f;
}

LinearSystem assemble_system(const chart::Grid& grid, const std::vector<CoordinateCoefficients>& coeffs,
                             const VectorXd& residual) {
  const auto& interior = grid.interior();
  const auto N = static_cast<Eigen::Index>(interior.size());
  if (coeffs.size() != interior.size() || residual.size() != N)
    throw AssemblyError("coefficient count does not match the interior node count");
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t row = 0; row < interior.size(); ++row) {
    const int node = interior[row];
    const auto& c = coeffs[row];
    for (const auto& pt : grid.stencil(node).points) {
      const int col = grid.unknown_index(pt.node);
      if (col < 0) continue;
      double val = c.d_grad.dot(pt.wg) + c.d_hess.cwiseProduct(pt.wh).sum();
      if (pt.node == node) val += c.d_u;
      trips.emplace_back(static_cast<int>(row), col, val);
    }
  }
  LinearSystem sys;
  sys.J.resize(N, N);
  sys.J.setFromTriplets(trips.begin(), trips.end());
  sys.J.makeCompressed();
  sys.rhs = -residual;
  sys.unknown_nodes = interior;
  return sys;
}

VectorXd solve(const LinearSystem& system) {
  if (system.rhs.size() == 0) return VectorXd();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(system.J);
  lu.factorize(system.J);
  if (lu.info() != Eigen::Success) throw AssemblyError("Newton matrix is singular: " + lu.lastErrorMessage());
  VectorXd x = lu.solve(system.rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw AssemblyError("sparse solve failed");
  return x;
}

MonotonicityReport deformed_monotonicity_check(const chart::GraphField& field, const std::vector<double>& ts,
                                               int k, double tol) {
  MonotonicityReport rep;
  rep.t = ts;
  std::sort(rep.t.begin(), rep.t.end());
  rep.min_fd_slope = std::numeric_limits<double>::infinity();
  const auto& grid = *field.grid;
  for (int node : grid.interior()) {
    const auto& pg = grid.geometry(node);
    FrameJet x = curvature::frame_jet(chart::jet(field, node), pg);
    if (field.rep == chart::Representation::V) x = curvature::u_jet_from_v(x, Background::deformed(0.0));
    else if (field.rep != chart::Representation::U)
      throw UnsupportedError("monotonicity check needs a u or v field");
    auto G = [&](double t) {
      const auto s = curvature::geometry_deformed(x, t);
      return curvature::f_and_derivatives(s.kappa, k).f;
    };
    std::vector<double> values;
    try {
      for (double t : rep.t) values.push_back(G(t));
    } catch (const AdmissibilityError&) {
      ++rep.nodes_skipped;
      continue;
    }
    ++rep.nodes_checked;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double viol = values[i] - values[i + 1];
      if (viol > rep.worst_violation) {
        rep.worst_violation = viol;
        rep.worst_node = node;
      }
    }
    for (double t : rep.t) {
      const double dt = 1e-5;
      const double lo = std::max(0.0, t - dt);
      const double hi = std::min(1.0, t + dt);
      try {
        rep.min_fd_slope = std::min(rep.min_fd_slope, (G(hi) - G(lo)) / (hi - lo));
      } catch (const AdmissibilityError&) {
      }
    }
  }
  rep.monotone = rep.worst_violation <= tol;
  return rep;
}

}  // namespace radgraph::linearization
