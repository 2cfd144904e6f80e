#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "radgraph/continuity.hpp"
#include "radgraph/expression.hpp"
#include "radgraph/problem.hpp"
#include "support.hpp"

using namespace radgraph;
namespace fs = std::filesystem;

namespace {

expr::Symbols sym2(expr::RepVar rep = expr::RepVar::U) { return expr::Symbols{2, rep}; }

double eval_at(const std::string& text, const std::vector<std::pair<std::string, double>>& values = {},
               expr::RepVar rep = expr::RepVar::U) {
  const auto s = sym2(rep);
  std::vector<double> vars(static_cast<std::size_t>(s.count()), 0.0);
  for (const auto& [name, x] : values) vars[static_cast<std::size_t>(s.lookup(name))] = x;
  return expr::Expression::parse(text, s).eval(vars);
}

const std::string kMinimal =
    "# centred sphere\n"
    "[problem]\n"
    "space_form = 0\n"
    "k = 2\n"
    "n = 2\n"
    "representation = rho\n"
    "[domain]\n"
    "theta0 = 0.6283185307179586\n"
    "h = 0.1\n"
    "[equation]\n"
    "psi = 1/0.64\n"
    "boundary = 0.8\n"
    "subsolution = bump 0.05\n";

std::vector<problem::LocatedError> errors_of(const std::string& text) {
  try {
    problem::parse_problem(text);
  } catch (const problem::ProblemError& e) {
    return e.errors();
  }
  return {};
}

}  // namespace

// ---------------------------------------------------------------------------
// Expressions

TEST(Expression, Precedence) {
  EXPECT_EQ(eval_at("1 + 2*3"), 7.0);
  EXPECT_EQ(eval_at("-2^2"), -4.0);
  EXPECT_EQ(eval_at("2^3^2"), 512.0);
  EXPECT_EQ(eval_at("2^-1"), 0.5);
  EXPECT_EQ(eval_at("(1 + 2)*3"), 9.0);
  EXPECT_EQ(eval_at("8/4/2"), 1.0);
  EXPECT_EQ(eval_at("1 - 2 - 3"), -4.0);
  EXPECT_EQ(eval_at("--3"), 3.0);
  EXPECT_EQ(eval_at("2e-1 + 1.5E1"), 15.2);
}

TEST(Expression, DocumentedExamples) {
  EXPECT_EQ(eval_at("2*u + 1", {{"u", 3}}), 7.0);
  EXPECT_THROW(eval_at("1/(u-u)", {{"u", 3}}), EvalError);
  EXPECT_EQ(eval_at("exp(-gradnorm)", {{"gradnorm", 0}}), 1.0);
}

TEST(Expression, FunctionsAndConstants) {
  EXPECT_DOUBLE_EQ(eval_at("pi"), M_PI);
  EXPECT_DOUBLE_EQ(eval_at("cos(pi)"), -1.0);
  EXPECT_EQ(eval_at("max(1, 3)"), 3.0);
  EXPECT_EQ(eval_at("min(1, 3)"), 1.0);
  EXPECT_EQ(eval_at("pow(2, 10)"), 1024.0);
  EXPECT_EQ(eval_at("abs(-2.5)"), 2.5);
  EXPECT_DOUBLE_EQ(eval_at("log(exp(1.25))"), 1.25);
  EXPECT_DOUBLE_EQ(eval_at("cosh(0.3)^2 - sinh(0.3)^2"), 1.0);
}

TEST(Expression, Variables) {
  EXPECT_EQ(eval_at("y1 + 10*y2 + 100*z3", {{"y1", 1}, {"y2", 2}, {"z3", 3}}), 321.0);
  EXPECT_EQ(eval_at("u*gradnorm + p1 - p2", {{"u", 2}, {"gradnorm", 3}, {"p1", 1}, {"p2", 4}}), 3.0);
  EXPECT_EQ(eval_at("rho^2", {{"rho", 3}}, expr::RepVar::Rho), 9.0);
  EXPECT_EQ(eval_at("nu_rad + nu_tan2", {{"nu_rad", -0.5}, {"nu_tan2", 0.25}}), -0.25);
}

TEST(Expression, Classification) {
  const auto s = sym2();
  EXPECT_TRUE(expr::Expression::parse("3*pi", s).is_constant());
  EXPECT_TRUE(expr::Expression::parse("y1 + z3", s).position_only());
  EXPECT_FALSE(expr::Expression::parse("y1 + u", s).position_only());
  EXPECT_TRUE(expr::Expression::parse("gradnorm", s).uses(s.gradnorm()));
  EXPECT_FALSE(expr::Expression::parse("gradnorm", s).uses(s.rep_var()));
}

TEST(Expression, DualDerivatives) {
  const auto s = sym2();
  const auto e = expr::Expression::parse("u^2 * sin(y1) + exp(u)", s);
  std::vector<Dual> vars(static_cast<std::size_t>(s.count()), Dual(0.0));
  vars[static_cast<std::size_t>(s.y(0))] = Dual(0.7);
  vars[static_cast<std::size_t>(s.rep_var())] = Dual::variable(1.3, 0);
  const Dual r = e.eval(vars);
  EXPECT_DOUBLE_EQ(r.value(), 1.3 * 1.3 * std::sin(0.7) + std::exp(1.3));
  EXPECT_DOUBLE_EQ(r.d(0), 2 * 1.3 * std::sin(0.7) + std::exp(1.3));
}

TEST(Expression, Errors) {
  const auto s = sym2();
  try {
    expr::Expression::parse("1 + foo", s);
    FAIL() << "unknown name accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 5);
  }
  EXPECT_THROW(expr::Expression::parse("1 +", s), ParseError);
  EXPECT_THROW(expr::Expression::parse("(1", s), ParseError);
  EXPECT_THROW(expr::Expression::parse("sin(1, 2)", s), ParseError);
  EXPECT_THROW(expr::Expression::parse("y3", s), ParseError);
  EXPECT_THROW(expr::Expression::parse("rho", s), ParseError);
  EXPECT_THROW(eval_at("1/(y1 - y1)"), EvalError);
  EXPECT_THROW(eval_at("log(-1)"), EvalError);
}

TEST(Expression, GoldenAgainstReferenceInterpreter) {
  std::ifstream in(std::string(RADGRAPH_TEST_DATA) + "/expressions.json");
  ASSERT_TRUE(in) << "missing expressions.json";
  const auto j = nlohmann::json::parse(in);
  const auto s = sym2();
  ASSERT_EQ(j["cases"].size(), 200u);
  for (const auto& c : j["cases"]) {
    const std::string text = c["text"];
    std::vector<double> vars(static_cast<std::size_t>(s.count()), 0.0);
    for (const auto& [name, x] : c["vars"].items()) {
      const int id = s.lookup(name);
      ASSERT_GE(id, 0) << name;
      vars[static_cast<std::size_t>(id)] = x.get<double>();
    }
    const double expected = c["value"];
    const double got = expr::Expression::parse(text, s).eval(vars);
    EXPECT_NEAR(got, expected, 1e-12 * std::max(1.0, std::abs(expected))) << text;
  }
}

// ---------------------------------------------------------------------------
// Problem files

TEST(ProblemFile, Minimal) {
  const auto p = problem::parse_problem(kMinimal);
  EXPECT_EQ(p.space_form, 0);
  EXPECT_EQ(p.k, 2);
  EXPECT_EQ(p.representation, "rho");
  EXPECT_EQ(p.domain_kind, "cap");
  EXPECT_DOUBLE_EQ(p.theta0, 0.6283185307179586);
  EXPECT_EQ(p.h, 0.1);
  EXPECT_EQ(p.chart, "gnomonic");
  EXPECT_EQ(p.subsolution, "bump 0.05");
  EXPECT_EQ(p.method, "auto");
  EXPECT_EQ(p.tol, 1e-10);
}

TEST(ProblemFile, SphereBuilderMinimal) {
  const std::string text =
      "[problem]\nspace_form = 0\nk = 2\nn = 2\n[domain]\nkind = cap\ntheta0 = 0.5\nh = 0.1\n"
      "[equation]\npsi = 1\nboundary = 1\nsubsolution = sphere 1 0\n";
  const auto p = problem::parse_problem(text);
  EXPECT_EQ(p.subsolution, "sphere 1 0");
  const auto spec = continuity::make_spec(p);
  for (int id = 0; id < spec.grid->size(); ++id) EXPECT_NEAR(spec.subsolution.values(id), 1.0, 1e-15);
}

TEST(ProblemFile, SampleProblemsParse) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(RADGRAPH_PROBLEMS)) {
    if (entry.path().extension() != ".prob") continue;
    std::ifstream in(entry.path());
    std::ostringstream os;
    os << in.rdbuf();
    EXPECT_NO_THROW(continuity::make_spec(problem::parse_problem(os.str()))) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 6);
}

TEST(ProblemFile, UnknownKeyIsLocated) {
  const auto errs = errors_of(kMinimal + "foo = 1\n");
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0].line, 14);
  EXPECT_EQ(errs[0].column, 1);
  EXPECT_NE(errs[0].message.find("foo"), std::string::npos);
}

TEST(ProblemFile, WrongRepresentationVariable) {
  std::string text = kMinimal;
  text.replace(text.find("psi = 1/0.64"), 12, "psi = 1 + v^2");
  const auto errs = errors_of(text);
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0].line, 11);
  EXPECT_NE(errs[0].message.find("v"), std::string::npos);
}

TEST(ProblemFile, CollectsSeveralErrors) {
  std::string text = kMinimal;
  text.replace(text.find("space_form = 0"), 14, "space_form = 2");
  text.replace(text.find("h = 0.1"), 7, "h = -1");
  EXPECT_EQ(errors_of(text).size(), 2u);
  // Syntax errors are reported together, before any validation.
  const auto syntax = errors_of(text + "[nosuch]\nbar\n[domain]\nbaz = 2\n");
  ASSERT_EQ(syntax.size(), 3u);
  EXPECT_EQ(syntax[0].line, 14);
  EXPECT_EQ(syntax[1].line, 15);
  EXPECT_EQ(syntax[2].line, 17);
}

TEST(ProblemFile, MissingRequiredKeys) {
  std::string text = kMinimal;
  text.erase(text.find("boundary = 0.8\n"), 15);
  EXPECT_FALSE(errors_of(text).empty());
}

TEST(ProblemFile, RoundTrips) {
  auto p = problem::parse_problem(kMinimal + "[homotopy]\nepsilon = 0.125\nt_exponent = 3\n[reference]\nexact = 0.8\n");
  EXPECT_EQ(problem::parse_problem(problem::to_text(p)), p);
  EXPECT_EQ(problem::from_json(problem::to_json(p)), p);
  EXPECT_EQ(p.epsilon, 0.125);
  EXPECT_EQ(p.t_exponent, 3);
}

// ---------------------------------------------------------------------------
// Command line

#ifdef RADGRAPH_CLI

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("radgraph_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const int rc = std::system((std::string(RADGRAPH_CLI) + " " + args + " > " + stdout_file.string() + " 2>/dev/null").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string sample(const std::string& name) { return (fs::path(RADGRAPH_PROBLEMS) / name).string(); }

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, SaddleSubsolutionExitsWithAdmissibilityCode) {
  TempDir dir("saddle");
  write(dir.path / "saddle.prob",
        "[problem]\nspace_form = 0\nk = 2\nn = 2\nrepresentation = u\n"
        "[domain]\ntheta0 = 0.6283185307179586\nh = 0.1\n"
        "[equation]\npsi = 1\nboundary = 2 + 3*(y1^2 - y2^2)\nsubsolution = expr 2 + 3*(y1^2 - y2^2)\n");
  EXPECT_EQ(run("check-subsolution --problem " + (dir.path / "saddle.prob").string() + " --out " +
                (dir.path / "out").string()),
            2);
  std::ifstream in(dir.path / "out" / "subsolution.json");
  ASSERT_TRUE(in);
  const auto j = nlohmann::json::parse(in);
  EXPECT_FALSE(j.dump().find("AdmissibilityLoss") == std::string::npos);
}

TEST(Cli, CentredSphereSolves) {
  TempDir dir("sphere");
  write(dir.path / "sphere.prob", kMinimal);
  EXPECT_EQ(run("solve --problem " + (dir.path / "sphere.prob").string() + " --out " + (dir.path / "out").string()), 0);
  std::ifstream in(dir.path / "out" / "report.json");
  ASSERT_TRUE(in);
  const auto j = nlohmann::json::parse(in);
  EXPECT_LE(j["report"]["sigma_residual"].get<double>(), 1e-8);
  EXPECT_TRUE(fs::exists(dir.path / "out" / "solution.csv"));
  EXPECT_TRUE(fs::exists(dir.path / "out" / "solution.grid"));
}

TEST(Cli, ParseErrorExitsWithInputCode) {
  TempDir dir("bad");
  write(dir.path / "bad.prob", kMinimal + "foo = 1\n");
  EXPECT_EQ(run("solve --problem " + (dir.path / "bad.prob").string() + " --out " + (dir.path / "out").string()), 1);
}

TEST(Cli, ErrorsAreJsonOnStdout) {
  TempDir dir("errjson");
  write(dir.path / "bad.prob", kMinimal + "foo = 1\n");
  EXPECT_EQ(run("check-subsolution --problem " + (dir.path / "bad.prob").string() + " --out " + (dir.path / "out").string(),
                dir.path / "stdout.json"),
            1);
  const auto j = nlohmann::json::parse(slurp(dir.path / "stdout.json"));
  EXPECT_EQ(j["error"]["type"], "parse");
  ASSERT_EQ(j["error"]["errors"].size(), 1u);
  EXPECT_EQ(j["error"]["errors"][0]["line"], 14);
}

TEST(Cli, ReportsAreBitIdentical) {
  TempDir dir("determinism");
  const std::string prob = sample("offcentre_sphere.prob");
  ASSERT_EQ(run("solve --h 0.09 --trace --problem " + prob + " --out " + (dir.path / "a").string()), 0);
  ASSERT_EQ(run("solve --h 0.09 --trace --problem " + prob + " --out " + (dir.path / "b").string()), 0);
  for (const char* f : {"report.json", "trace.json", "solution.csv", "solution.grid"}) {
    const auto a = slurp(dir.path / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir.path / "b" / f)) << f;
  }
  EXPECT_EQ(slurp(dir.path / "a" / "report.json").find("seconds"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path / "a" / "timing.json"));
}

TEST(Cli, ConvergenceOrderOnOffCentreSphere) {
  TempDir dir("convergence");
  ASSERT_EQ(run("convergence --problem " + sample("offcentre_sphere.prob") + " --hs 0.0625,0.03125,0.015625 --out " +
                (dir.path).string()),
            0);
  const auto j = nlohmann::json::parse(slurp(dir.path / "convergence.json"));
  EXPECT_GE(j["min_order"].get<double>(), 1.8);
  EXPECT_EQ(j["levels"].size(), 3u);
}

TEST(Cli, LincheckPasses) {
  TempDir dir("lincheck");
  EXPECT_EQ(run("lincheck --problem " + sample("hyperbolic_geodesic.prob") + " --out " + dir.path.string()), 0);
  const auto j = nlohmann::json::parse(slurp(dir.path / "lincheck.json"));
  EXPECT_TRUE(j["ok"].get<bool>());
}

TEST(Cli, CurvatureOfSolutionGrid) {
  TempDir dir("curvature");
  ASSERT_EQ(run("solve --problem " + sample("hyperbolic_geodesic.prob") + " --out " + (dir.path / "s").string()), 0);
  ASSERT_EQ(run("curvature --grid " + (dir.path / "s" / "solution.grid").string() + " --out " + (dir.path / "c").string()), 0);
  const auto j = nlohmann::json::parse(slurp(dir.path / "c" / "curvature.json"));
  EXPECT_NEAR(j["min_kappa"].get<double>(), 1.0 / std::tanh(1.0), 1e-10);
  EXPECT_NEAR(j["max_kappa"].get<double>(), 1.0 / std::tanh(1.0), 1e-10);
  EXPECT_EQ(j["nodes_outside_gamma_k"], 0);
}

TEST(Cli, MissingFileExitsWithInputCode) { EXPECT_EQ(run("solve --problem /nonexistent/x.prob"), 1); }

#endif
