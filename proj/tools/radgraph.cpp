// radgraph: command line front end.
//
//   radgraph solve             --problem FILE [--out DIR] [--h H] [--tol T] [--max-newton N] [--trace]
//   radgraph curvature         --grid FILE [--space-form K] [--k K] [--out DIR]
//   radgraph check-subsolution --problem FILE [--out DIR] [--h H]
//   radgraph lincheck          --problem FILE [--out DIR] [--h H] [--max-nodes N]
//   radgraph convergence       --problem FILE [--out DIR] [--hs H1,H2,...] [--mode curvature|solve]
//
// Exit codes: 0 success, 1 usage / input error, 2 admissibility failure, 3 solver or check failure.
// Errors are reported on stdout as {"error": {...}}.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "radgraph/continuity.hpp"
#include "radgraph/curvature.hpp"
#include "radgraph/errors.hpp"
#include "radgraph/linearization.hpp"
#include "radgraph/problem.hpp"

namespace fs = std::filesystem;
using namespace radgraph;
using nlohmann::json;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitAdmissibility = 2;
constexpr int kExitFailure = 3;

struct Common {
  std::string problem;
  std::string out = ".";
  double h = 0.0;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::string fmt(double x) {
  if (!std::isfinite(x)) return "";
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

struct Loaded {
  problem::ProblemFile file;
  continuity::ProblemSpec spec;
};

Loaded load(const Common& c) {
  Loaded l;
  l.file = problem::parse_problem(read_text(c.problem));
  const auto dir = fs::path(c.problem).parent_path().string();
  l.spec = continuity::make_spec(l.file, dir.empty() ? "." : dir, c.h);
  return l;
}

fs::path out_dir(const std::string& out) {
  fs::path p(out);
  fs::create_directories(p);
  return p;
}

// Chart coordinates, rho, extreme curvatures and the sigma_k residual per node.
void write_solution_csv(const fs::path& path, const continuity::ProblemSpec& spec, const chart::GraphField& v) {
  const auto& grid = *spec.grid;
  const auto rho = continuity::to_user(spec, v, chart::Representation::Rho);
  const auto res = continuity::sigma_residuals(spec, v);
  const auto bg = continuity::solver_background(spec);
  std::ofstream out(path);
  for (int i = 0; i < grid.dim(); ++i) out << "y" << i + 1 << ",";
  out << "rho,kappa_min,kappa_max,residual\n";
  for (int id = 0; id < grid.size(); ++id) {
    for (int i = 0; i < grid.dim(); ++i) out << fmt(grid.node(id).y(i)) << ",";
    out << fmt(rho.values(id)) << ",";
    const int row = grid.unknown_index(id);
    if (row >= 0) {
      const auto st = curvature::geometry(v, id, bg);
      out << fmt(st.kappa.minCoeff()) << "," << fmt(st.kappa.maxCoeff()) << "," << fmt(res(row)) << "\n";
    } else {
      out << ",,\n";
    }
  }
}

void write_timing(const fs::path& dir, const std::string& command, std::chrono::steady_clock::time_point start) {
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(dir / "timing.json", {{"command", command}, {"wall_seconds", secs}});
}

int exit_for(continuity::Status s) {
  switch (s) {
    case continuity::Status::Converged:
      return 0;
    case continuity::Status::AdmissibilityLoss:
      return kExitAdmissibility;
    default:
      return kExitFailure;
  }
}

// ---------------------------------------------------------------------------

int cmd_solve(const Common& c, std::optional<double> tol, std::optional<int> max_newton, bool trace) {
  const auto start = std::chrono::steady_clock::now();
  auto l = load(c);
  if (tol) l.file.tol = *tol;
  if (max_newton) l.file.max_newton = *max_newton;
  const auto cfg = continuity::config_from(l.file);
  const auto report = continuity::solve(l.spec, cfg, l.file.method);
  const auto dir = out_dir(c.out);

  json j;
  j["problem"] = problem::to_json(l.file);
  j["grid"] = {{"h", l.spec.grid->spacing()},
               {"nodes", l.spec.grid->size()},
               {"interior", l.spec.grid->interior().size()}};
  j["report"] = continuity::to_json(report);
  if (report.status == continuity::Status::Converged) {
    const auto user = continuity::to_user(l.spec, report.solution, l.spec.rep);
    {
      std::ofstream g(dir / "solution.grid");
      chart::write_grid(g, user, {l.spec.sf.K, true});
    }
    write_solution_csv(dir / "solution.csv", l.spec, report.solution);
    if (const auto ex = continuity::exact_field(l.spec)) {
      double err = 0.0;
      for (int id = 0; id < l.spec.grid->size(); ++id) err = std::max(err, std::abs(user.values(id) - ex->values(id)));
      j["exact_sup_error"] = err;
    }
  }
  write_json(dir / "report.json", j);
  if (trace) write_json(dir / "trace.json", j["report"]["trace"]);
  write_timing(dir, "solve", start);
  std::cout << json{{"status", continuity::to_string(report.status)},
                    {"residual", report.residual},
                    {"sigma_residual", report.sigma_residual},
                    {"message", report.message}}
                   .dump()
            << "\n";
  return exit_for(report.status);
}

int cmd_curvature(const std::string& grid_path, std::optional<int> K_opt, std::optional<int> k_opt,
                  const std::string& out) {
  const auto start = std::chrono::steady_clock::now();
  std::ifstream in(grid_path);
  if (!in) throw Error("cannot open " + grid_path);
  chart::GridFileExtras extras;
  const auto field = chart::read_grid(in, &extras);
  int K = 0;
  if (K_opt) K = *K_opt;
  else if (extras.has_space_form) K = extras.space_form;
  else throw Error("the grid file has no space_form line; pass --space-form");
  const int n = field.grid->dim();
  const int k = k_opt ? *k_opt : n;
  if (k < 1 || k > n) throw Error("k must lie in 1..n");
  const auto bg = curvature::Background::space_form(K);
  const auto dir = out_dir(out);

  std::ofstream csv(dir / "curvature.csv");
  for (int i = 0; i < n; ++i) csv << "y" << i + 1 << ",";
  for (int i = 0; i < n; ++i) csv << "kappa" << i + 1 << ",";
  csv << "sigma_k,in_gamma_k\n";
  double kmin = std::numeric_limits<double>::infinity();
  double kmax = -kmin;
  int outside = 0;
  for (int id : field.grid->interior()) {
    const auto st = curvature::geometry(field, id, bg);
    const auto cone = curvature::cone_check(st.kappa, k);
    for (int i = 0; i < n; ++i) csv << fmt(field.grid->node(id).y(i)) << ",";
    for (int i = 0; i < n; ++i) csv << fmt(st.kappa(i)) << ",";
    csv << fmt(curvature::sigma_k(st.kappa, k)) << "," << (cone.in_gamma_k ? 1 : 0) << "\n";
    kmin = std::min(kmin, st.kappa.minCoeff());
    kmax = std::max(kmax, st.kappa.maxCoeff());
    if (!cone.in_gamma_k) ++outside;
  }
  const json j{{"space_form", K},
               {"k", k},
               {"interior_nodes", field.grid->interior().size()},
               {"min_kappa", kmin},
               {"max_kappa", kmax},
               {"nodes_outside_gamma_k", outside}};
  write_json(dir / "curvature.json", j);
  write_timing(dir, "curvature", start);
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_check(const Common& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto l = load(c);
  const auto r = continuity::verify_subsolution(l.spec);
  const auto dir = out_dir(c.out);
  const json j = continuity::to_json(r);
  write_json(dir / "subsolution.json", j);
  write_timing(dir, "check-subsolution", start);
  std::cout << j.dump() << "\n";
  if (r.ok) return 0;
  return r.status == continuity::Status::AdmissibilityLoss ? kExitAdmissibility : kExitFailure;
}

// Analytic Newton coefficients against central differences of G in the coordinate jet.
int cmd_lincheck(const Common& c, int max_nodes) {
  const auto start = std::chrono::steady_clock::now();
  const auto l = load(c);
  const auto& grid = *l.spec.grid;
  const auto bg = continuity::solver_background(l.spec);
  const auto v = continuity::to_solver(l.spec, l.spec.subsolution);
  const int n = grid.dim();
  const int k = l.spec.k;
  const auto& interior = grid.interior();
  const std::size_t stride = std::max<std::size_t>(1, interior.size() / static_cast<std::size_t>(std::max(1, max_nodes)));

  double err_u = 0.0, err_grad = 0.0, err_hess = 0.0;
  int checked = 0;
  for (std::size_t row = 0; row < interior.size(); row += stride) {
    const int node = interior[row];
    const auto& pg = grid.geometry(node);
    const chart::Jet j0 = chart::jet(grid, v.values, node);
    const auto x0 = curvature::frame_jet(j0, pg);
    const auto st = curvature::geometry_v(x0, bg);
    const auto cc = linearization::to_coordinates(linearization::coefficients_v(st, x0, bg, k), pg);
    auto G = [&](const chart::Jet& j) {
      return linearization::operator_value(curvature::frame_jet(j, pg), chart::Representation::V, bg, k);
    };
    auto central = [&](auto&& perturb, double h) {
      chart::Jet a = j0, b = j0;
      perturb(a, h);
      perturb(b, -h);
      return (G(a) - G(b)) / (2.0 * h);
    };
    double scale = std::abs(cc.d_u);
    scale = std::max(scale, cc.d_grad.cwiseAbs().maxCoeff());
    scale = std::max(scale, cc.d_hess.cwiseAbs().maxCoeff());
    const double hstep = 1e-6;
    const double fu = central([](chart::Jet& j, double h) { j.value += h; }, hstep);
    err_u = std::max(err_u, std::abs(fu - cc.d_u) / scale);
    for (int i = 0; i < n; ++i) {
      const double fg = central([i](chart::Jet& j, double h) { j.grad(i) += h; }, hstep);
      err_grad = std::max(err_grad, std::abs(fg - cc.d_grad(i)) / scale);
      for (int m = i; m < n; ++m) {
        const double fh = central(
            [i, m](chart::Jet& j, double h) {
              j.hess(i, m) += h;
              if (m != i) j.hess(m, i) += h;
            },
            hstep);
        const double an = (m == i ? 1.0 : 2.0) * cc.d_hess(i, m);
        err_hess = std::max(err_hess, std::abs(fh - an) / scale);
      }
    }
    ++checked;
  }
  const bool ok = err_u < 1e-5 && err_grad < 1e-5 && err_hess < 1e-5;
  const json j{{"nodes_checked", checked},
               {"max_rel_error_value", err_u},
               {"max_rel_error_gradient", err_grad},
               {"max_rel_error_hessian", err_hess},
               {"ok", ok}};
  const auto dir = out_dir(c.out);
  write_json(dir / "lincheck.json", j);
  write_timing(dir, "lincheck", start);
  std::cout << j.dump() << "\n";
  return ok ? 0 : kExitFailure;
}

int cmd_convergence(const Common& c, std::vector<double> hs, const std::string& mode) {
  const auto start = std::chrono::steady_clock::now();
  const auto file = problem::parse_problem(read_text(c.problem));
  if (file.exact.empty()) throw Error("convergence needs a [reference] exact expression");
  if (hs.empty()) hs = {file.h, file.h / 2.0, file.h / 4.0};
  const auto dirname = fs::path(c.problem).parent_path().string();
  json rows = json::array();
  std::vector<double> errs;
  for (double h : hs) {
    const auto spec = continuity::make_spec(file, dirname.empty() ? "." : dirname, h);
    const auto exact = *continuity::exact_field(spec);
    json row{{"h", h}, {"nodes", spec.grid->size()}};
    if (mode == "curvature") {
      const auto res = continuity::sigma_residuals(spec, continuity::to_solver(spec, exact));
      double regular = 0.0, all = 0.0;
      for (std::size_t i = 0; i < spec.grid->interior().size(); ++i) {
        const double e = std::abs(res(static_cast<Eigen::Index>(i)));
        all = std::max(all, e);
        if (spec.grid->stencil(spec.grid->interior()[i]).regular) regular = std::max(regular, e);
      }
      row["error"] = regular;
      row["error_all_nodes"] = all;
      errs.push_back(regular);
    } else {
      const auto report = continuity::solve(spec, continuity::config_from(file), file.method);
      if (report.status != continuity::Status::Converged)
        throw Error("solve failed at h = " + fmt(h) + ": " + report.message);
      const auto user = continuity::to_user(spec, report.solution, spec.rep);
      double err = 0.0;
      for (int id = 0; id < spec.grid->size(); ++id) err = std::max(err, std::abs(user.values(id) - exact.values(id)));
      row["error"] = err;
      row["sigma_residual"] = report.sigma_residual;
      errs.push_back(err);
    }
    rows.push_back(row);
  }
  json orders = json::array();
  double min_order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double p = std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]);
    orders.push_back(p);
    min_order = std::min(min_order, p);
  }
  const json j{{"mode", mode}, {"levels", rows}, {"orders", orders}, {"min_order", min_order}};
  const auto dir = out_dir(c.out);
  write_json(dir / "convergence.json", j);
  write_timing(dir, "convergence", start);
  std::cout << j.dump() << "\n";
  return 0;
}

json error_json(const std::string& type, const std::string& message) {
  return {{"error", {{"type", type}, {"message", message}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strictly locally convex radial graphs of prescribed curvature"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");

  Common common;
  std::optional<double> tol;
  std::optional<int> max_newton;
  bool trace = false;
  auto* solve = app.add_subcommand("solve", "Solve the problem by continuation");
  solve->add_option("--problem", common.problem, "Problem file")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", common.out, "Output directory");
  solve->add_option("--h", common.h, "Grid spacing override");
  solve->add_option("--tol", tol, "Newton tolerance (sup-norm residual)");
  solve->add_option("--max-newton", max_newton, "Newton iteration limit");
  solve->add_flag("--trace", trace, "Write the homotopy trace to trace.json");

  std::string grid_path;
  std::optional<int> K_opt;
  std::optional<int> k_opt;
  auto* curv = app.add_subcommand("curvature", "Principal curvatures of a grid file");
  curv->add_option("--grid", grid_path, "Grid file")->required()->check(CLI::ExistingFile);
  curv->add_option("--space-form", K_opt, "Space form K (-1, 0, 1)")->check(CLI::Range(-1, 1));
  curv->add_option("--k", k_opt, "Curvature order");
  curv->add_option("--out", common.out, "Output directory");

  auto* check = app.add_subcommand("check-subsolution", "Verify the subsolution of a problem");
  check->add_option("--problem", common.problem, "Problem file")->required()->check(CLI::ExistingFile);
  check->add_option("--out", common.out, "Output directory");
  check->add_option("--h", common.h, "Grid spacing override");

  int max_nodes = 200;
  auto* lin = app.add_subcommand("lincheck", "Check Newton coefficients against finite differences");
  lin->add_option("--problem", common.problem, "Problem file")->required()->check(CLI::ExistingFile);
  lin->add_option("--out", common.out, "Output directory");
  lin->add_option("--h", common.h, "Grid spacing override");
  lin->add_option("--max-nodes", max_nodes, "Number of nodes to sample");

  std::vector<double> hs;
  std::string mode = "curvature";
  auto* conv = app.add_subcommand("convergence", "Refinement study against the reference solution");
  conv->add_option("--problem", common.problem, "Problem file")->required()->check(CLI::ExistingFile);
  conv->add_option("--out", common.out, "Output directory");
  conv->add_option("--hs", hs, "Grid spacings")->delimiter(',');
  conv->add_option("--mode", mode, "curvature or solve")->check(CLI::IsMember({"curvature", "solve"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << error_json("usage", e.what()).dump() << "\n";
    return kExitInput;
  }

  try {
    if (*solve) return cmd_solve(common, tol, max_newton, trace);
    if (*curv) return cmd_curvature(grid_path, K_opt, k_opt, common.out);
    if (*check) return cmd_check(common);
    if (*lin) return cmd_lincheck(common, max_nodes);
    return cmd_convergence(common, hs, mode);
  } catch (const problem::ProblemError& e) {
    json errs = json::array();
    for (const auto& le : e.errors()) errs.push_back({{"line", le.line}, {"column", le.column}, {"message", le.message}});
    std::cout << json{{"error", {{"type", "parse"}, {"message", e.what()}, {"errors", errs}}}}.dump() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    std::cout << json{{"error",
                       {{"type", "parse"}, {"message", e.message()}, {"line", e.line()}, {"column", e.column()}}}}
                     .dump()
              << "\n";
    return kExitInput;
  } catch (const AdmissibilityError& e) {
    std::cout << json{{"error", {{"type", "admissibility"}, {"message", e.what()}, {"node", e.node()}}}}.dump()
              << "\n";
    return kExitAdmissibility;
  } catch (const std::exception& e) {
    std::cout << error_json("runtime", e.what()).dump() << "\n";
    return kExitFailure;
  }
}
