#include <gtest/gtest.h>

#include <cmath>

#include "radgraph/continuity.hpp"
#include "radgraph/errors.hpp"
#include "support.hpp"

using namespace radgraph;
using namespace radgraph::continuity;
using radgraph::testing::kCapTheta;
using radgraph::testing::num;

namespace {

const double kCoarse = std::tan(kCapTheta) / 8.0;

// Centred geodesic sphere rho = r in K = 0 with the subsolution given as an expression.
std::string centred_problem(double h, const std::string& subsolution, const std::string& extra = "") {
  return "[problem]\nspace_form = 0\nk = 2\nn = 2\nrepresentation = rho\n"
         "[domain]\ntheta0 = " + num(kCapTheta) + "\nh = " + num(h) + "\n"
         "[equation]\npsi = 1/0.64\nboundary = 0.8\nsubsolution = " + subsolution + "\n" + extra;
}

std::string saddle_problem(double h) {
  return "[problem]\nspace_form = 0\nk = 2\nn = 2\nrepresentation = u\n"
         "[domain]\ntheta0 = " + num(kCapTheta) + "\nh = " + num(h) + "\n"
         "[equation]\npsi = 1\nboundary = 2 + 3*(y1^2 - y2^2)\nsubsolution = expr 2 + 3*(y1^2 - y2^2)\n";
}

Equation target(const ProblemSpec& spec) {
  const auto bg = solver_background(spec);
  return {bg, spec.k, psi_rhs(spec, bg)};
}

double sup_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

// ---------------------------------------------------------------------------
// Subsolution checks

TEST(Subsolution, ExactSolutionPassesWithZeroMargin) {
  const auto spec = radgraph::testing::spec_from_text(centred_problem(kCoarse, "expr 0.8"));
  const auto rep = verify_subsolution(spec);
  EXPECT_TRUE(rep.ok) << rep.message;
  EXPECT_NEAR(rep.inequality_margin, 0.0, 1e-13);
  EXPECT_EQ(rep.boundary_mismatch, 0.0);
  EXPECT_GT(rep.min_convexity, 0.0);
}

TEST(Subsolution, SmallerSpherePasses) {
  const auto spec = radgraph::testing::spec_from_text(radgraph::testing::offcentre_problem(kCoarse, 0.85));
  const auto rep = verify_subsolution(spec);
  EXPECT_TRUE(rep.ok) << rep.message;
  EXPECT_GT(rep.inequality_margin, 0.0);
  EXPECT_LT(rep.boundary_mismatch, 1e-12);
}

TEST(Subsolution, LargerSphereFailsInequality) {
  // A flatter sphere through the same circle has curvature below psi.
  const auto spec = radgraph::testing::spec_from_text(radgraph::testing::offcentre_problem(kCoarse, 1.3));
  const auto rep = verify_subsolution(spec);
  EXPECT_FALSE(rep.ok);
  EXPECT_LT(rep.inequality_margin, 0.0);
  EXPECT_GE(rep.inequality_node, 0);
}

TEST(Subsolution, SaddleIsRejected) {
  const auto spec = radgraph::testing::spec_from_text(saddle_problem(kCoarse));
  const auto rep = verify_subsolution(spec);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.status, Status::AdmissibilityLoss);
  EXPECT_LT(rep.min_convexity, 0.0);
  EXPECT_GE(rep.convexity_node, 0);
}

// ---------------------------------------------------------------------------
// Newton

TEST(Newton, ExactDiscreteSolutionIsAFixedPoint) {
  const auto spec = radgraph::testing::spec_from_text(radgraph::testing::offcentre_problem(kCoarse));
  const auto r = solve(spec, HomotopyConfig{});
  ASSERT_EQ(r.status, Status::Converged) << r.message;
  const auto nr = newton_solve(target(spec), r.solution);
  EXPECT_EQ(nr.status, Status::Converged);
  EXPECT_LE(nr.iterations, 2);
  EXPECT_LE(nr.residual, 1e-10);
}

TEST(Newton, StageOneStartIsSolvedByTheSubsolution) {
  // G[v] = (G[v_] / xi(v_)) xi(v) is solved by v_ itself.
  const auto spec = radgraph::testing::spec_from_text(radgraph::testing::offcentre_problem(kCoarse));
  const auto bg = solver_background(spec);
  const auto lower = to_solver(spec, spec.subsolution);
  std::vector<double> ratio(static_cast<std::size_t>(spec.grid->size()), 0.0);
  for (int id : spec.grid->interior()) {
    const auto s = curvature::geometry(lower, id, bg);
    ratio[static_cast<std::size_t>(id)] =
        curvature::f_and_derivatives(s.kappa, 2).f / spaceform::xi(spec.sf, lower.values(id));
  }
  Equation eq{bg, 2, [&](int node, const Dual& v, const std::vector<Dual>&) {
                return ratio[static_cast<std::size_t>(node)] * exp(2.0 * v);
              }};
  const auto nr = newton_solve(eq, lower);
  EXPECT_EQ(nr.status, Status::Converged);
  EXPECT_EQ(nr.iterations, 0);
  EXPECT_LT(nr.residual, 1e-12);
  EXPECT_LT(nr.max_zero_order, 0.0);
}

TEST(Newton, QuadraticTail) {
  const auto spec = radgraph::testing::spec_from_text(centred_problem(kCoarse, "bump 0.05"));
  const auto nr = newton_solve(target(spec), to_solver(spec, spec.subsolution));
  ASSERT_EQ(nr.status, Status::Converged) << nr.message;
  const auto& h = nr.history;
  ASSERT_GE(h.size(), 3u);
  // Order estimate from the last three residuals above the roundoff floor.
  double order = 0.0;
  for (std::size_t i = 2; i < h.size(); ++i) {
    if (h[i] < 1e-13) break;
    order = std::log(h[i] / h[i - 1]) / std::log(h[i - 1] / h[i - 2]);
  }
  EXPECT_GE(order, 1.5);
}

TEST(Newton, RejectsNonConvexStart) {
  const auto spec = radgraph::testing::spec_from_text(saddle_problem(kCoarse));
  const auto nr = newton_solve(target(spec), to_solver(spec, spec.subsolution));
  EXPECT_EQ(nr.status, Status::AdmissibilityLoss);
}

TEST(Newton, StatusNames) {
  EXPECT_EQ(to_string(Status::Converged), "Converged");
  EXPECT_EQ(to_string(Status::StepFailure), "StepFailure");
  EXPECT_EQ(to_string(Status::AdmissibilityLoss), "AdmissibilityLoss");
  EXPECT_EQ(to_string(Status::MaxIterations), "MaxIterations");
}

// ---------------------------------------------------------------------------
// Stage 1 and 2

TEST(StageOne, StartsAtSubsolutionAndStaysAbove) {
  for (const std::string& text : {radgraph::testing::offcentre_problem(kCoarse), radgraph::testing::geodesic_problem(-1, kCoarse)}) {
    const auto spec = radgraph::testing::spec_from_text(text);
    const auto r = stage1_path(spec, HomotopyConfig{});
    ASSERT_EQ(r.status, Status::Converged) << r.message;
    ASSERT_FALSE(r.trace.empty());
    EXPECT_EQ(r.trace.front().t, 0.0);
    EXPECT_EQ(r.trace.front().iterations, 0);
    EXPECT_EQ(r.trace.back().t, 1.0);
    EXPECT_GE(r.min_ordering, -1e-10);
    for (const auto& p : r.trace) EXPECT_LT(p.max_zero_order, 0.0);
    ASSERT_EQ(r.uniqueness.size(), 3u);
    for (const auto& u : r.uniqueness) {
      EXPECT_TRUE(u.converged);
      EXPECT_LT(u.sup_difference, 1e-8);
    }
    // The epsilon actually used meets G[v_] > eps xi(v_) with margin.
    EXPECT_LE(1.2 * r.constants.at("epsilon"), r.constants.at("min_G_over_xi"));
  }
}

TEST(StageTwo, GradientDependentRightHandSide) {
  // psi = c (1 + 0.1 / w~), w~ = sqrt(1 + |nabla' v|^2), in the v representation.
  const std::string text = "[problem]\nspace_form = 0\nk = 2\nn = 2\nrepresentation = v\n"
                           "[domain]\ntheta0 = " + num(kCapTheta) + "\nh = " + num(kCoarse) + "\n"
                           "[equation]\npsi = 0.5*(1 + 0.1/sqrt(1 + gradnorm^2))\nboundary = 0\nsubsolution = bump 0.05\n";
  const auto spec = radgraph::testing::spec_from_text(text);
  ASSERT_TRUE(verify_subsolution(spec).ok);
  const auto r = two_stage_solve(spec, HomotopyConfig{});
  ASSERT_EQ(r.status, Status::Converged) << r.message;
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_LE(r.sigma_residual, 1e-8);
  EXPECT_GE(r.min_ordering, -1e-10);
  EXPECT_LT(r.max_interior_gap, 0.0);
  EXPECT_TRUE(r.all_admissible);
}

TEST(Drivers, RequireGaussCurvature) {
  std::string text = radgraph::testing::offcentre_problem(kCoarse);
  text.replace(text.find("k = 2\nn = 2"), 11, "k = 1\nn = 2");
  EXPECT_THROW(problem::parse_problem(text), problem::ProblemError);
  text += "[homotopy]\nmethod = newton\n";
  auto spec = radgraph::testing::spec_from_text(text);
  EXPECT_THROW(stage1_path(spec, HomotopyConfig{}), UnsupportedError);
}

TEST(Drivers, DeterministicReports) {
  const auto spec = radgraph::testing::spec_from_text(radgraph::testing::offcentre_problem(kCoarse));
  const auto a = solve(spec, HomotopyConfig{});
  const auto b = solve(spec, HomotopyConfig{});
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(sup_diff(a.solution.values, b.solution.values), 0.0);
}

// ---------------------------------------------------------------------------
// Sphere path

TEST(SpherePath, EuclideanEndpointOfDeformation) {
  const auto spec = radgraph::testing::spec_from_text(radgraph::testing::geodesic_problem(1, kCoarse));
  auto u = chart::make_field(spec.grid, chart::Representation::U);
  for (int id = 0; id < spec.grid->size(); ++id) u.values(id) = 1.0 / std::tan(spec.subsolution.values(id));
  for (int id : spec.grid->interior()) {
    const auto a0 = curvature::geometry_deformed(u, id, 0.0);
    const auto e = curvature::geometry_from_u(u, id, spaceform::SpaceFormParams::make(0));
    EXPECT_LT((a0.a - e.a).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SpherePath, ConstantsAndRecovery) {
  const auto spec = radgraph::testing::spec_from_text(radgraph::testing::geodesic_problem(1, kCoarse));
  const auto r = sphere_path(spec, HomotopyConfig{});
  ASSERT_EQ(r.status, Status::Converged) << r.message;
  const double eps = r.constants.at("epsilon"), d1 = r.constants.at("delta1"), d2 = r.constants.at("delta2");
  const int m = static_cast<int>(r.constants.at("t_exponent"));

  // Independent evaluation of G0[u_] and max over t of psi^t[u_] (psi is constant here).
  auto u = chart::make_field(spec.grid, chart::Representation::U);
  for (int id = 0; id < spec.grid->size(); ++id) u.values(id) = 1.0 / std::tan(spec.subsolution.values(id));
  double minG0 = 1e300, max_u2 = 0.0;
  for (int id : spec.grid->interior())
    minG0 = std::min(minG0, curvature::f_and_derivatives(curvature::geometry_deformed(u, id, 0.0).kappa, 2).f);
  for (int id = 0; id < spec.grid->size(); ++id) max_u2 = std::max(max_u2, u.values(id) * u.values(id));
  const double psi_root = 1.0 / std::tan(1.0);
  EXPECT_GT(minG0, 2.0 * std::pow(1.0 - d1, m) * psi_root);
  EXPECT_LT(d2 * max_u2, 0.5 * eps);
  EXPECT_GT(eps, 0.0);

  EXPECT_LE(r.residual, 1e-10);
  for (const auto& [stage, h] : r.handoff) EXPECT_LT(h, 1e-10) << stage;
  EXPECT_TRUE(r.all_admissible);
  const auto exact = exact_field(spec);
  ASSERT_TRUE(exact);
  const auto user = to_user(spec, r.solution, chart::Representation::Rho);
  EXPECT_LT(sup_diff(user.values, exact->values), 1e-6);
}

TEST(SpherePath, RejectsOtherSpaceForms) {
  const auto spec = radgraph::testing::spec_from_text(radgraph::testing::offcentre_problem(kCoarse));
  EXPECT_THROW(sphere_path(spec, HomotopyConfig{}), UnsupportedError);
}

// ---------------------------------------------------------------------------
// Diagnostics

TEST(Diagnostics, ConstantField) {
  const auto g = chart::build_cap_domain(kCapTheta, kCoarse);
  const auto f = chart::make_field(g, chart::Representation::U, 1.25);
  const auto d = diagnostics::diagnostics_monitor(f, curvature::Background::space_form(0));
  EXPECT_NEAR(d.max_w_interior, 1.25, 1e-15);
  EXPECT_NEAR(d.min_u, 1.25, 1e-15);
  EXPECT_TRUE(std::isfinite(d.max_theta));
  EXPECT_TRUE(d.c1_ok);
  EXPECT_TRUE(d.all_admissible);
  EXPECT_NEAR(d.min_tau, 1.0 / 1.25, 1e-14);
}

TEST(Diagnostics, AlongConvergedPath) {
  const auto spec = radgraph::testing::spec_from_text(radgraph::testing::offcentre_problem(kCoarse));
  const auto r = solve(spec, HomotopyConfig{});
  ASSERT_EQ(r.status, Status::Converged);
  for (const auto& p : r.trace) {
    EXPECT_GT(p.diag.min_kappa, 0.0) << p.stage << " t=" << p.t;
    EXPECT_GT(p.diag.min_tau, 0.0);
    EXPECT_TRUE(std::isfinite(p.diag.max_theta));
    EXPECT_TRUE(p.diag.c1_ok) << p.diag.c1_gap;
  }
  EXPECT_GT(r.min_hopf, 0.0);
}

TEST(Diagnostics, SupEstimateOnRingMaximum) {
  // u = 1 + 0.05 (0.09 - (|y| - 0.3)^2) peaks on the circle |y| = 0.3 with value 1.0045.
  const double h = std::tan(kCapTheta) / 10;
  const auto g = chart::build_cap_domain(kCapTheta, h);
  auto f = chart::make_field(g, chart::Representation::U);
  double node_max = 0.0;
  for (int id = 0; id < g->size(); ++id) {
    const double s = g->node(id).y.norm() - 0.3;
    f.values(id) = 1.0 + 0.05 * (0.09 - s * s);
    node_max = std::max(node_max, f.values(id));
  }
  const auto d = diagnostics::diagnostics_monitor(f, curvature::Background::space_form(0));
  EXPECT_GE(d.sup_u_estimate, node_max);
  EXPECT_NEAR(d.sup_u_estimate, 1.0045, 2e-4);
}

TEST(Diagnostics, SupEstimateAtSmoothMaximum) {
  // Unit sphere centred below the origin: u = 1/rho peaks inside the cap, in the direction -c.
  const auto g = chart::build_cap_domain(kCapTheta, std::tan(kCapTheta) / 20);
  const Eigen::Vector3d c(0.05, 0.03, -0.2);
  const auto rho = radgraph::testing::sphere_rho_field(g, c, 1.0);
  auto u = chart::make_field(g, chart::Representation::U);
  for (int id = 0; id < g->size(); ++id) u.values(id) = 1.0 / rho.values(id);
  const auto d = diagnostics::diagnostics_monitor(u, curvature::Background::space_form(0));
  // The closest point of the sphere to the origin is at distance R - |c|.
  EXPECT_NEAR(d.sup_u_estimate, 1.0 / (1.0 - c.norm()), 1e-6);
  EXPECT_TRUE(d.c1_ok) << d.c1_gap;
}
