#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "radgraph/curvature.hpp"
#include "radgraph/errors.hpp"
#include "support.hpp"

using namespace radgraph;
using namespace radgraph::curvature;
using radgraph::testing::kPi;
using radgraph::testing::uniform;

namespace {

// sigma_k by enumeration of all k-subsets.
double brute_sigma(const Eigen::VectorXd& x, int k) {
  const int n = static_cast<int>(x.size());
  double s = 0.0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) != k) continue;
    double p = 1.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) p *= x(i);
    s += p;
  }
  return s;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Eigen::VectorXd random_gamma_k(std::mt19937& rng, int n, int k) {
  // Rejection sample around the positive cone so some points have negative entries.
  for (;;) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = uniform(rng, -0.5, 2.0);
    if (cone_check(x, k).in_gamma_k) return x;
  }
}

// Chart jet of a closed-form scalar at y by central differences with step d.
chart::Jet fd_jet(const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& y, double d) {
  const int n = static_cast<int>(y.size());
  chart::Jet j;
  j.value = fn(y);
  j.grad.resize(n);
  j.hess.resize(n, n);
  auto at = [&](int a, double sa, int b, double sb) {
    Eigen::VectorXd p = y;
    p(a) += sa;
    p(b) += sb;
    return fn(p);
  };
  for (int a = 0; a < n; ++a) {
    j.grad(a) = (at(a, d, a, 0) - at(a, -d, a, 0)) / (2 * d);
    for (int b = 0; b < n; ++b)
      j.hess(a, b) = a == b ? (at(a, d, a, 0) - 2 * j.value + at(a, -d, a, 0)) / (d * d)
                            : (at(a, d, b, d) - at(a, d, b, -d) - at(a, -d, b, d) + at(a, -d, b, -d)) / (4 * d * d);
  }
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sphere oracles

TEST(SphereOracles, GeodesicSpheresAllSpaceForms) {
  const auto g = chart::build_cap_domain(kPi / 5, 1.0 / 16);
  struct Case {
    int K;
    double r;
    double kappa;
  };
  for (const Case c : {Case{0, 0.8, 1.0 / 0.8}, Case{-1, 1.3, 1.0 / std::tanh(1.3)}, Case{1, 0.9, 1.0 / std::tan(0.9)}}) {
    const auto f = chart::make_field(g, chart::Representation::Rho, c.r);
    EXPECT_LT(radgraph::testing::kappa_error(f, Background::space_form(c.K), c.kappa, false), 1e-12) << "K=" << c.K;
    auto u = chart::make_field(g, chart::Representation::U, spaceform::zeta_inverse(spaceform::SpaceFormParams::make(c.K), c.r));
    EXPECT_LT(radgraph::testing::kappa_error(u, Background::space_form(c.K), c.kappa, false), 1e-12) << "K=" << c.K;
    for (int id : g->interior()) {
      const auto s = geometry(f, id, Background::space_form(c.K));
      EXPECT_NEAR(s.tau, s.warp.phi, 1e-14);
    }
  }
}

TEST(SphereOracles, OffCentreSphereSecondOrder) {
  const Eigen::Vector3d c(0.1, -0.15, 0.2);
  std::vector<double> err;
  for (int m : {16, 32, 64}) {
    const auto g = chart::build_cap_domain(kPi / 5, 1.0 / m);
    err.push_back(radgraph::testing::kappa_error(radgraph::testing::sphere_rho_field(g, c, 1.0), Background::space_form(0),
                                                  1.0, true));
  }
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_GT(std::log2(err[i - 1] / err[i]), 1.8) << err[i - 1] << " " << err[i];
  EXPECT_LT(err.back(), 1e-3);
}

TEST(SphereOracles, AmbientEmbeddingAtSampleNodes) {
  // Support function <x, nu> and curvature 1/R of the ambient sphere |x - c| = R.
  const Eigen::Vector3d c(0.1, -0.15, 0.2);
  const double R = 1.0;
  const chart::Chart ch = chart::Chart::gnomonic(2);
  auto rho = [&](const Eigen::VectorXd& y) { return radgraph::testing::sphere_rho(ch.to_sphere(y), c, R); };
  std::mt19937 rng(20);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd y = (Eigen::VectorXd(2) << uniform(rng, -0.6, 0.6), uniform(rng, -0.6, 0.6)).finished();
    const auto pg = chart::point_geometry(ch, y);
    const FrameJet jr = frame_jet(fd_jet(rho, y, 1e-4), pg);
    const auto s = geometry_u(u_jet_from_rho(jr, 0), spaceform::SpaceFormParams::make(0));
    const Eigen::Vector3d x = rho(y) * ch.to_sphere(y);
    EXPECT_NEAR(s.tau, x.dot((x - c) / R), 1e-8);
    EXPECT_LT((s.kappa.array() - 1.0 / R).abs().maxCoeff(), 1e-6);
  }
}

// ---------------------------------------------------------------------------
// Representations

TEST(Geometry, AlgebraicIdentities) {
  std::mt19937 rng(21);
  for (int K : {0, 1, -1}) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto s = geometry_u(radgraph::testing::random_u_jet(rng, K), Background::space_form(K));
      const int n = s.n;
      EXPECT_LT((s.gamma_down * s.gamma_down - s.g).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((s.gamma_up * s.gamma_down - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((s.g * s.g_inv - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((s.a - s.a.transpose()).cwiseAbs().maxCoeff(), 1e-13);
      for (int i = 1; i < n; ++i) EXPECT_GE(s.kappa(i - 1), s.kappa(i));
      EXPECT_GT(s.tau, 0.0);
      EXPECT_GT(s.kappa.minCoeff(), 0.0);
      EXPECT_NEAR(s.tau, support_function(s), 1e-14);
      EXPECT_NEAR(s.nu_rad * s.nu_rad + s.nu_tan.squaredNorm(), 1.0, 1e-12);
    }
  }
}

TEST(Geometry, CrossRepresentation) {
  std::mt19937 rng(22);
  for (int K : {0, 1, -1}) {
    const auto sf = spaceform::SpaceFormParams::make(K);
    const auto bg = Background::space_form(K);
    for (int trial = 0; trial < 100; ++trial) {
      const FrameJet u = radgraph::testing::random_u_jet(rng, K);
      const auto su = geometry_u(u, bg);
      const auto sv = geometry_v(radgraph::testing::v_jet_from_u(u, bg), bg);
      EXPECT_LT((su.kappa - sv.kappa).cwiseAbs().maxCoeff(), 1e-9);
      // rho jet by the chain rule rho = zeta(u).
      FrameJet r;
      r.value = spaceform::zeta(sf, u.value);
      r.p = spaceform::zeta_prime(sf, u.value) * u.p;
      r.r = spaceform::zeta_prime(sf, u.value) * u.r + spaceform::zeta_second(sf, u.value) * u.p * u.p.transpose();
      const auto sr = geometry_u(u_jet_from_rho(r, K), bg);
      EXPECT_LT((su.kappa - sr.kappa).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Geometry, ConstantVMatchesU) {
  for (int K : {0, 1, -1}) {
    const auto bg = Background::space_form(K);
    FrameJet v;
    v.value = 0.7;
    v.p = Eigen::VectorXd::Zero(2);
    v.r = Eigen::MatrixXd::Zero(2, 2);
    const auto sv = geometry_v(v, bg);
    const auto su = geometry_u(curvature::u_jet_from_v(v, bg), bg);
    EXPECT_LT((sv.kappa - su.kappa).cwiseAbs().maxCoeff(), 1e-10);
    // Zero gradient: gamma~ = I and a = eta I + eta' nabla'^2 v.
    v.r << 0.2, 0.05, 0.05, 0.1;
    const auto s2 = geometry_v(v, bg);
    const Eigen::MatrixXd a = bg.eta(v.value) * Eigen::MatrixXd::Identity(2, 2) + bg.eta_prime(v.value) * v.r;
    EXPECT_LT((s2.a - a).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Geometry, DeformedEndpoints) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const FrameJet u = radgraph::testing::random_u_jet(rng, 1);
    const auto s1 = geometry_deformed(u, 1.0);
    const auto k1 = geometry_u(u, spaceform::SpaceFormParams::make(1));
    EXPECT_LT((s1.kappa - k1.kappa).cwiseAbs().maxCoeff(), 1e-10);
    const auto s0 = geometry_deformed(u, 0.0);
    const auto k0 = geometry_u(u, spaceform::SpaceFormParams::make(0));
    EXPECT_LT((s0.kappa - k0.kappa).cwiseAbs().maxCoeff(), 1e-10);
  }
  FrameJet u = radgraph::testing::random_u_jet(rng, 1);
  EXPECT_THROW(geometry_deformed(u, 1.5), DomainError);
  EXPECT_THROW(geometry_deformed(u, -0.5), DomainError);
}

TEST(Geometry, OutOfRangeThrows) {
  FrameJet u;
  u.value = 0.5;
  u.p = Eigen::VectorXd::Zero(2);
  u.r = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(geometry_u(u, spaceform::SpaceFormParams::make(-1)), DomainError);
}

// ---------------------------------------------------------------------------
// Symmetric functions and cones

TEST(Sigma, Examples) {
  EXPECT_DOUBLE_EQ(sigma_k((Eigen::VectorXd(3) << 1, 2, 3).finished(), 2), 11.0);
  for (int n = 1; n <= 6; ++n)
    for (int k = 0; k <= n; ++k) EXPECT_NEAR(sigma_k(Eigen::VectorXd::Ones(n), k), binom(n, k), 1e-12);
  std::mt19937 rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = uniform(rng, -2, 2);
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(sigma_k(x, k), brute_sigma(x, k), 1e-13 * std::max(1.0, std::abs(brute_sigma(x, k))));
  }
}

TEST(Sigma, ExcludingMatchesBruteForce) {
  std::mt19937 rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x(i) = uniform(rng, -2, 2);
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd rest(4);
      for (int j = 0, c = 0; j < 5; ++j)
        if (j != i) rest(c++) = x(j);
      for (int m = 0; m <= 4; ++m) EXPECT_NEAR(sigma_excluding(x, m, i), brute_sigma(rest, m), 1e-12);
    }
  }
}

TEST(Cone, Examples) {
  const Eigen::VectorXd x = (Eigen::VectorXd(2) << 3, -1).finished();
  EXPECT_TRUE(cone_check(x, 1).in_gamma_k);
  EXPECT_FALSE(cone_check(x, 2).in_gamma_k);
  EXPECT_DOUBLE_EQ(cone_check(x, 2).sigmas(1), -3.0);
  EXPECT_TRUE(cone_check(Eigen::VectorXd::Constant(3, 0.5), 3).in_gamma_k);
  EXPECT_TRUE(cone_check(Eigen::VectorXd::Constant(3, 0.5), 3).strictly_locally_convex);
  EXPECT_FALSE(cone_check((Eigen::VectorXd(2) << 1, 0).finished(), 2).in_gamma_k);
  EXPECT_FALSE(cone_check((Eigen::VectorXd(2) << 1, -1).finished(), 1).in_gamma_k);
}

TEST(FFunction, Examples) {
  for (int n = 2; n <= 5; ++n)
    for (int k = 1; k <= n; ++k) {
      const auto d = f_and_derivatives(Eigen::VectorXd::Ones(n), k);
      EXPECT_NEAR(d.f, std::pow(binom(n, k), 1.0 / k), 1e-13);
      EXPECT_LT((d.fi.array() - d.fi(0)).abs().maxCoeff(), 1e-14);
    }
  std::mt19937 rng(26);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 4, k = 1 + trial % n;
    const Eigen::VectorXd x = random_gamma_k(rng, n, k);
    const auto d = f_and_derivatives(x, k);
    EXPECT_NEAR(f_and_derivatives(2.0 * x, k).f, 2.0 * d.f, 1e-13 * d.f);
    for (int i = 0; i < n; ++i) {
      EXPECT_GT(d.fi(i), 0.0);
      const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      const double fd = (f_and_derivatives(xp, k).f - f_and_derivatives(xm, k).f) / (2 * h);
      EXPECT_NEAR(d.fi(i), fd, 1e-7 * std::max(1.0, std::abs(fd)));
    }
  }
  EXPECT_THROW(f_and_derivatives((Eigen::VectorXd(2) << 1, -1).finished(), 2), AdmissibilityError);
}

TEST(FMatrix, Examples) {
  for (int n = 2; n <= 4; ++n) {
    const auto F = F_matrix(Eigen::MatrixXd::Identity(n, n), n);
    EXPECT_LT((F.F - Eigen::MatrixXd::Identity(n, n) / n).cwiseAbs().maxCoeff(), 1e-14);
  }
  std::mt19937 rng(27);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3, k = 1 + trial % n;
    Eigen::MatrixXd a;
    do {
      a = radgraph::testing::random_spd(rng, n, -0.5, 2.0);
    } while (!cone_check(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues(), k).in_gamma_k);
    const auto F = F_matrix(a, k);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(F.F).eigenvalues().minCoeff(), 0.0);
    // F^{ij} a_ij = sum f_i kappa_i <= f.
    const double contraction = F.F.cwiseProduct(a).sum();
    EXPECT_NEAR(contraction, F.fi.dot(F.kappa), 1e-12);
    EXPECT_LE(contraction, F.f + 1e-12);
    // dF/da_ij by symmetric perturbation of the pair (i, j), (j, i).
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double h = 1e-6;
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
        e(i, j) = e(j, i) = h;
        const double fd = (F_matrix(a + e, k).f - F_matrix(a - e, k).f) / (2 * h);
        const double an = i == j ? F.F(i, i) : 2.0 * F.F(i, j);
        EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(fd)));
      }
  }
  EXPECT_THROW(F_matrix(-Eigen::MatrixXd::Identity(2, 2), 1), AdmissibilityError);
}

TEST(FFunction, Concavity) {
  std::mt19937 rng(28);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + trial % 4, k = 1 + trial % n;
    const Eigen::VectorXd a = random_gamma_k(rng, n, k), b = random_gamma_k(rng, n, k);
    const double mid = f_and_derivatives(0.5 * (a + b), k).f;
    EXPECT_GE(mid, 0.5 * f_and_derivatives(a, k).f + 0.5 * f_and_derivatives(b, k).f - 1e-12);
  }
}
