#pragma once

// Shared fixtures: seeded random admissible jets and fields, analytic sphere graphs and
// problem-file builders.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "radgraph/continuity.hpp"
#include "radgraph/curvature.hpp"
#include "radgraph/problem.hpp"
#include "radgraph/sphere_chart.hpp"

namespace radgraph::testing {

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random symmetric positive definite n x n matrix with eigenvalues roughly in [lo, hi].
inline Eigen::MatrixXd random_spd(std::mt19937& rng, int n, double lo, double hi) {
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = uniform(rng, -1.0, 1.0);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = uniform(rng, lo, hi);
  return q * d.asDiagonal() * q.transpose();
}

/// Admissible u range used for sampling in each background curvature c.
inline double random_u(std::mt19937& rng, int K) {
  if (K == -1) return uniform(rng, 1.2, 3.0);
  if (K == 1) return uniform(rng, 0.3, 2.0);
  return uniform(rng, 0.4, 2.0);
}

/// Frame jet of u with nabla'^2 u + u I positive definite (strictly locally convex).
inline curvature::FrameJet random_u_jet(std::mt19937& rng, int K, int n = 2) {
  curvature::FrameJet j;
  j.value = random_u(rng, K);
  j.p.resize(n);
  for (int i = 0; i < n; ++i) j.p(i) = uniform(rng, -0.4, 0.4) * j.value;
  j.r = random_spd(rng, n, 0.2 * j.value, 1.5 * j.value) - j.value * Eigen::MatrixXd::Identity(n, n);
  return j;
}

/// Frame jet of v = eta^{-1}(u) for a u jet, eta being the substitution of `bg`.
inline curvature::FrameJet v_jet_from_u(const curvature::FrameJet& u, const curvature::Background& bg) {
  curvature::FrameJet v;
  v.value = bg.eta_inverse(u.value);
  const double d1 = bg.eta_prime(v.value);
  const double d2 = bg.eta_second(v.value);
  v.p = u.p / d1;
  v.r = (u.r - d2 * v.p * v.p.transpose()) / d1;
  return v;
}

/// Smooth perturbation of a constant field with random low-frequency modes.
inline chart::GraphField random_smooth_field(std::mt19937& rng, const chart::GridPtr& grid, chart::Representation rep,
                                             double base, double amplitude) {
  chart::GraphField f = chart::make_field(grid, rep, base);
  const double a1 = uniform(rng, -1, 1), a2 = uniform(rng, -1, 1), a3 = uniform(rng, -1, 1);
  const double b1 = uniform(rng, -1, 1), b2 = uniform(rng, -1, 1);
  for (int id = 0; id < grid->size(); ++id) {
    const auto& y = grid->node(id).y;
    const double s = a1 * y(0) + a2 * y(1) + a3 * y(0) * y(1) + b1 * std::sin(2.0 * y(0)) + b2 * std::cos(1.5 * y(1));
    f.values(id) = base + amplitude * s;
  }
  return f;
}

/// Off-centre Euclidean sphere |x - c| = R seen as a radial graph: rho(z).
inline double sphere_rho(const Eigen::VectorXd& z, const Eigen::VectorXd& c, double R) {
  const double cz = c.dot(z);
  return cz + std::sqrt(R * R - c.squaredNorm() + cz * cz);
}

inline chart::GraphField sphere_rho_field(const chart::GridPtr& grid, const Eigen::VectorXd& c, double R) {
  chart::GraphField f = chart::make_field(grid, chart::Representation::Rho);
  for (int id = 0; id < grid->size(); ++id) f.values(id) = sphere_rho(grid->chart().to_sphere(grid->node(id).y), c, R);
  return f;
}

/// Largest interior |kappa_i - kappa_exact| over regular (or all) stencils.
inline double kappa_error(const chart::GraphField& f, const curvature::Background& bg, double exact, bool regular_only) {
  double err = 0.0;
  for (int node : f.grid->interior()) {
    if (regular_only && !f.grid->stencil(node).regular) continue;
    const auto s = curvature::geometry(f, node, bg);
    err = std::max(err, (s.kappa.array() - exact).abs().maxCoeff());
  }
  return err;
}

// ---------------------------------------------------------------------------
// Problem files

constexpr double kPi = 3.14159265358979323846;
constexpr double kCapTheta = kPi / 5.0;

/// Boundary radius of the |c| = 0.3, R = 1 sphere over the cap edge, and the centre
/// height of the radius-Rs sphere through the same boundary circle.
inline double offcentre_boundary_rho() {
  const double z3 = std::cos(kCapTheta);
  return 0.3 * z3 + std::sqrt(0.91 + 0.09 * z3 * z3);
}

inline double smaller_sphere_centre(double Rs) {
  const double rb = offcentre_boundary_rho();
  const double s = rb * std::sin(kCapTheta);
  return rb * std::cos(kCapTheta) - std::sqrt(Rs * Rs - s * s);
}

inline std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

/// K = 0 off-centre sphere problem on the pi/5 cap.
inline std::string offcentre_problem(double h, double Rs = 0.85) {
  const std::string sphere = "0.3*z3 + sqrt(0.91 + 0.09*z3^2)";
  return "[problem]\nspace_form = 0\nk = 2\nn = 2\nrepresentation = rho\n"
         "[domain]\nkind = cap\ntheta0 = " + num(kCapTheta) + "\nh = " + num(h) + "\n"
         "[equation]\npsi = 1\nboundary = " + sphere + "\nsubsolution = sphere " + num(Rs) + " " +
         num(smaller_sphere_centre(Rs)) + "\n"
         "[reference]\nexact = " + sphere + "\n";
}

/// Geodesic sphere rho = r for K = -1 or +1 with psi = (phi'/phi)^2 and a bump subsolution.
inline std::string geodesic_problem(int K, double h, double r = 1.0, double bump = 0.1) {
  const std::string ratio = K == 1 ? "cos(" + num(r) + ")/sin(" + num(r) + ")" : "cosh(" + num(r) + ")/sinh(" + num(r) + ")";
  return "[problem]\nspace_form = " + std::to_string(K) + "\nk = 2\nn = 2\n"
         "[domain]\ntheta0 = " + num(kCapTheta) + "\nh = " + num(h) + "\n"
         "[equation]\npsi = (" + ratio + ")^2\nboundary = " + num(r) + "\nsubsolution = bump " + num(bump) + "\n"
         "[reference]\nexact = " + num(r) + "\n";
}

inline continuity::ProblemSpec spec_from_text(const std::string& text) {
  return continuity::make_spec(problem::parse_problem(text));
}

}  // namespace radgraph::testing
