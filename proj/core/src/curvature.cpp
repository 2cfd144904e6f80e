#include "radgraph/curvature.hpp"

#include <cmath>
#include <sstream>

#include "radgraph/errors.hpp"
#include "radgraph/small_linalg.hpp"

namespace radgraph::curvature {

using Eigen::MatrixXd;
using Eigen::VectorXd;

FrameJet frame_jet(const chart::Jet& j, const chart::PointGeometry& g) {
  FrameJet f;
  f.value = j.value;
  f.p = g.frame * j.grad;
  f.r = symmetrize(g.frame * chart::covariant_hessian(j, g) * g.frame);
  return f;
}

// ---------------------------------------------------------------------------
// Background

Background Background::space_form(int K) {
  spaceform::SpaceFormParams::make(K);
  Background bg;
  bg.c = K;
  bg.eta_K = K;
  bg.K = K;
  return bg;
}

Background Background::deformed(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream os;
    os << "deformation parameter t = " << t << " outside [0, 1]";
    throw DomainError(os.str());
  }
  Background bg;
  bg.c = t * t;
  bg.eta_K = 0;
  bg.t = t;
  bg.K = 1;
  return bg;
}

spaceform::Warp Background::warp(double u) const {
  if (is_deformed()) return spaceform::deformed_warp(t, u);
  return spaceform::warp(spaceform::SpaceFormParams::make(K), u);
}

bool Background::u_admissible(double u) const {
  if (is_deformed()) return u > 1e-12 && std::isfinite(u);
  return spaceform::u_in_range(spaceform::SpaceFormParams::make(K), u);
}

double Background::eta(double v) const { return spaceform::detail::eta(eta_K, v); }
double Background::eta_prime(double v) const { return spaceform::detail::eta_prime(eta_K, v); }
double Background::eta_inverse(double u) const { return spaceform::detail::eta_inverse(eta_K, u); }

FrameJet u_jet_from_rho(const FrameJet& rho, int K) {
  const auto sf = spaceform::SpaceFormParams::make(K);
  FrameJet u;
  u.value = spaceform::zeta_inverse(sf, rho.value);
  // (zeta^{-1})' = -(u^2 + K), (zeta^{-1})'' = 2u(u^2 + K).
  const double s = u.value * u.value + K;
  const double d1 = -s;
  const double d2 = 2.0 * u.value * s;
  u.p = d1 * rho.p;
  u.r = d1 * rho.r + d2 * rho.p * rho.p.transpose();
  return u;
}

FrameJet u_jet_from_v(const FrameJet& v, const Background& bg) {
  FrameJet u;
  u.value = bg.eta(v.value);
  const double d1 = bg.eta_prime(v.value);
  const double d2 = bg.eta_second(v.value);
  u.p = d1 * v.p;
  u.r = d1 * v.r + d2 * v.p * v.p.transpose();
  return u;
}

// ---------------------------------------------------------------------------
// Geometry

namespace {

void finish_eigen(GeometryState& s) {
  s.a = symmetrize(s.a);
  const auto e = symmetric_eigen(s.a);
  s.kappa = e.values;
  s.kappa_vectors = e.vectors;
}

void require_u(const Background& bg, double u) {
  if (!bg.u_admissible(u)) {
    std::ostringstream os;
    os.precision(17);
    os << "u = " << u << " outside the admissible range";
    throw DomainError(os.str());
  }
}

}  // namespace

GeometryState geometry_u(const FrameJet& u, const spaceform::Warp& wp) {
  GeometryState s;
  const int n = static_cast<int>(u.p.size());
  const MatrixXd id = MatrixXd::Identity(n, n);
  const MatrixXd ppt = u.p * u.p.transpose();
  const double phi = wp.phi;
  const double dz2 = wp.dzeta * wp.dzeta;

  s.n = n;
  s.warp = wp;
  s.u = u;
  s.grad_norm_sq = u.p.squaredNorm();
  s.w = std::sqrt(phi * phi + dz2 * s.grad_norm_sq);
  s.g = phi * phi * id + dz2 * ppt;
  s.g_inv = (id - (dz2 / (s.w * s.w)) * ppt) / (phi * phi);
  s.gamma_down = phi * id + (dz2 / (phi + s.w)) * ppt;
  s.gamma_up = (id - (dz2 / (s.w * (phi + s.w))) * ppt) / phi;
  s.convexity = symmetrize(u.r) + u.value * id;
  s.h = (-wp.dzeta * phi / s.w) * s.convexity;
  s.a = s.gamma_up * s.h * s.gamma_up;
  finish_eigen(s);
  s.tau = phi * phi / s.w;
  s.nu_rad = phi / s.w;
  s.nu_tan = (-wp.dzeta / s.w) * u.p;
  return s;
}

GeometryState geometry_u(const FrameJet& u, const spaceform::SpaceFormParams& sf) {
  spaceform::check_u(sf, u.value);
  return geometry_u(u, spaceform::warp(sf, u.value));
}

GeometryState geometry_u(const FrameJet& u, const Background& bg) {
  require_u(bg, u.value);
  return geometry_u(u, bg.warp(u.value));
}

GeometryState geometry_v(const FrameJet& v, const Background& bg) {
  const FrameJet u = u_jet_from_v(v, bg);
  GeometryState s = geometry_u(u, bg);
  // The v formula holds when the substitution matches the background curvature.
  if (bg.c != static_cast<double>(bg.eta_K)) return s;
  const int n = static_cast<int>(v.p.size());
  const MatrixXd id = MatrixXd::Identity(n, n);
  const double wt = std::sqrt(1.0 + v.p.squaredNorm());
  const MatrixXd gt = id - v.p * v.p.transpose() / (wt * (1.0 + wt));
  s.a = (bg.eta(v.value) * id + bg.eta_prime(v.value) * gt * symmetrize(v.r) * gt) / wt;
  finish_eigen(s);
  return s;
}

GeometryState geometry_v(const FrameJet& v, const spaceform::SpaceFormParams& sf) {
  spaceform::check_v(sf, v.value);
  return geometry_v(v, Background::space_form(sf.K));
}

GeometryState geometry_deformed(const FrameJet& u, double t) {
  return geometry_u(u, Background::deformed(t));
}

GeometryState geometry(const chart::GraphField& field, int node, const Background& bg) {
  const auto& pg = field.grid->geometry(node);
  const FrameJet x = frame_jet(chart::jet(field, node), pg);
  switch (field.rep) {
    case chart::Representation::U:
      return geometry_u(x, bg);
    case chart::Representation::V:
      return geometry_v(x, bg);
    default:
      if (bg.is_deformed()) throw UnsupportedError("rho fields are not supported in the deformed background");
      return geometry_u(u_jet_from_rho(x, bg.K), bg);
  }
}

GeometryState geometry_from_u(const chart::GraphField& field, int node, const spaceform::SpaceFormParams& sf) {
  if (field.rep != chart::Representation::U) throw DomainError("field is not in the u representation");
  return geometry(field, node, Background::space_form(sf.K));
}

GeometryState geometry_from_v(const chart::GraphField& field, int node, const spaceform::SpaceFormParams& sf) {
  if (field.rep != chart::Representation::V) throw DomainError("field is not in the v representation");
  spaceform::check_v(sf, field.values(node));
  return geometry(field, node, Background::space_form(sf.K));
}

GeometryState geometry_deformed(const chart::GraphField& field, int node, double t) {
  if (field.rep == chart::Representation::Rho)
    throw UnsupportedError("rho fields are not supported in the deformed background");
  return geometry(field, node, Background::deformed(t));
}

// ---------------------------------------------------------------------------
// Symmetric functions

VectorXd all_sigmas(const VectorXd& kappa) {
  const Eigen::Index n = kappa.size();
  VectorXd e = VectorXd::Zero(n + 1);
  e(0) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j >= 1; --j) e(j) += kappa(i) * e(j - 1);
  return e;
}

double sigma_k(const VectorXd& kappa, int k) {
  if (k < 0 || k > kappa.size()) throw DomainError("sigma_k order out of range");
  return all_sigmas(kappa)(k);
}

double sigma_excluding(const VectorXd& kappa, int m, int i) {
  const Eigen::Index n = kappa.size();
  if (m < 0 || m > n - 1) return m == 0 ? 1.0 : 0.0;
  VectorXd rest(n - 1);
  for (Eigen::Index j = 0, k = 0; j < n; ++j)
    if (j != i) rest(k++) = kappa(j);
  return all_sigmas(rest)(m);
}

ConeReport cone_check(const VectorXd& kappa, int k) {
  ConeReport r;
  r.k = k;
  const VectorXd e = all_sigmas(kappa);
  r.sigmas = e.segment(1, k);
  r.in_gamma_k = (r.sigmas.array() > 0.0).all();
  r.margin = kappa.size() ? kappa.minCoeff() : 0.0;
  r.strictly_locally_convex = r.margin > 0.0;
  return r;
}

FDerivatives f_and_derivatives(const VectorXd& kappa, int k) {
  const auto cone = cone_check(kappa, k);
  if (!cone.in_gamma_k) {
    std::ostringstream os;
    os << "principal curvatures leave the Garding cone Gamma_" << k;
    throw AdmissibilityError(os.str(), -1);
  }
  FDerivatives out;
  const double sk = cone.sigmas(k - 1);
  out.f = std::pow(sk, 1.0 / k);
  const double scale = out.f / (k * sk);
  out.fi.resize(kappa.size());
  for (Eigen::Index i = 0; i < kappa.size(); ++i)
    out.fi(i) = scale * sigma_excluding(kappa, k - 1, static_cast<int>(i));
  return out;
}

namespace {

FMatrix assemble_F(const VectorXd& kappa, const MatrixXd& Q, int k) {
  const auto d = f_and_derivatives(kappa, k);
  FMatrix m;
  m.f = d.f;
  m.kappa = kappa;
  m.fi = d.fi;
  m.F = symmetrize(Q * d.fi.asDiagonal() * Q.transpose());
  return m;
}

}  // namespace

FMatrix F_matrix(const MatrixXd& a, int k) {
  const auto e = symmetric_eigen(a);
  return assemble_F(e.values, e.vectors, k);
}

FMatrix F_matrix(const GeometryState& state, int k) {
  return assemble_F(state.kappa, state.kappa_vectors, k);
}

double support_function(const GeometryState& state) { return state.tau; }

}  // namespace radgraph::curvature
