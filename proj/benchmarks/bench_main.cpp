#include <benchmark/benchmark.h>

#include <cmath>
#include <sstream>

#include "radgraph/continuity.hpp"
#include "radgraph/curvature.hpp"
#include "radgraph/linearization.hpp"
#include "radgraph/problem.hpp"

using namespace radgraph;

namespace {

const double kTheta = M_PI / 5;

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string offcentre_problem(int m) {
  const double z3 = std::cos(kTheta);
  const double rb = 0.3 * z3 + std::sqrt(0.91 + 0.09 * z3 * z3);
  const double s = rb * std::sin(kTheta);
  const double centre = rb * z3 - std::sqrt(0.85 * 0.85 - s * s);
  const std::string sphere = "0.3*z3 + sqrt(0.91 + 0.09*z3^2)";
  return "[problem]\nspace_form = 0\nk = 2\nn = 2\nrepresentation = rho\n"
         "[domain]\ntheta0 = " + num(kTheta) + "\nh = " + num(std::tan(kTheta) / m) + "\n"
         "[equation]\npsi = 1\nboundary = " + sphere + "\nsubsolution = sphere 0.85 " + num(centre) + "\n";
}

continuity::ProblemSpec spec_for(int m) { return continuity::make_spec(problem::parse_problem(offcentre_problem(m))); }

// Curvature of every interior node of an off-centre sphere graph.
void BM_CurvatureSweep(benchmark::State& state) {
  const auto spec = spec_for(static_cast<int>(state.range(0)));
  const auto bg = curvature::Background::space_form(0);
  for (auto _ : state) {
    double acc = 0.0;
    for (int id : spec.grid->interior()) acc += curvature::geometry(spec.subsolution, id, bg).kappa(0);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(spec.grid->interior().size()));
}
BENCHMARK(BM_CurvatureSweep)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

// Analytic coefficients at one state.
void BM_Coefficients(benchmark::State& state) {
  const auto bg = curvature::Background::space_form(-1);
  curvature::FrameJet u;
  u.value = 1.7;
  u.p = Eigen::Vector2d(0.2, -0.1);
  u.r = (Eigen::Matrix2d() << -0.4, 0.1, 0.1, -0.6).finished();
  for (auto _ : state) {
    const auto s = curvature::geometry_u(u, bg);
    benchmark::DoNotOptimize(linearization::coefficients_u(s, 2));
  }
}
BENCHMARK(BM_Coefficients);

// Plain Newton from the smaller-sphere subsolution.
void BM_Newton(benchmark::State& state) {
  const auto spec = spec_for(static_cast<int>(state.range(0)));
  const auto bg = continuity::solver_background(spec);
  const continuity::Equation eq{bg, 2, continuity::psi_rhs(spec, bg)};
  const auto start = continuity::to_solver(spec, spec.subsolution);
  for (auto _ : state) benchmark::DoNotOptimize(continuity::newton_solve(eq, start).iterations);
}
BENCHMARK(BM_Newton)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

// Full continuation solve.
void BM_Solve(benchmark::State& state) {
  const auto spec = spec_for(static_cast<int>(state.range(0)));
  continuity::HomotopyConfig cfg;
  cfg.uniqueness_probe = false;
  for (auto _ : state) benchmark::DoNotOptimize(continuity::solve(spec, cfg).residual);
}
BENCHMARK(BM_Solve)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
