#include "radgraph/spaceform.hpp"

#include <numbers>
#include <sstream>
#include <string>

#include "radgraph/errors.hpp"

namespace radgraph::spaceform {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void range_error(const char* what, double value, double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << what << " = " << value << " outside (" << lo << ", " << hi << ")";
  throw DomainError(os.str());
}

void check_K(int K) {
  if (K != 0 && K != 1 && K != -1) throw DomainError("space form K must be -1, 0 or +1");
}

void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream os;
    os << "deformation parameter t = " << t << " outside [0, 1]";
    throw DomainError(os.str());
  }
}

}  // namespace

SpaceFormParams SpaceFormParams::make(int K, double margin) {
  check_K(K);
  return SpaceFormParams{K, margin};
}

VariableRanges ranges(const SpaceFormParams& sf) {
  check_K(sf.K);
  switch (sf.K) {
    case 0:
      return {kInf, 0.0, -kInf};
    case 1:
      return {std::numbers::pi / 2.0, 0.0, 0.0};
    default:
      return {kInf, 1.0, 0.0};
  }
}

void check_rho(const SpaceFormParams& sf, double rho) {
  const auto r = ranges(sf);
  if (!(rho > sf.margin && rho < r.rho_upper - sf.margin)) range_error("rho", rho, 0.0, r.rho_upper);
}

bool u_in_range(const SpaceFormParams& sf, double u) {
  const auto r = ranges(sf);
  return u > r.u_lower + sf.margin && std::isfinite(u);
}

bool v_in_range(const SpaceFormParams& sf, double v) {
  const auto r = ranges(sf);
  return v > r.v_lower + sf.margin && std::isfinite(v);
}

void check_u(const SpaceFormParams& sf, double u) {
  if (!u_in_range(sf, u)) range_error("u", u, ranges(sf).u_lower, kInf);
}

void check_v(const SpaceFormParams& sf, double v) {
  if (!v_in_range(sf, v)) range_error("v", v, ranges(sf).v_lower, kInf);
}

double phi(const SpaceFormParams& sf, double rho) {
  check_rho(sf, rho);
  if (sf.K == 0) return rho;
  if (sf.K == 1) return std::sin(rho);
  return std::sinh(rho);
}

double phi_prime(const SpaceFormParams& sf, double rho) {
  check_rho(sf, rho);
  if (sf.K == 0) return 1.0;
  if (sf.K == 1) return std::cos(rho);
  return std::cosh(rho);
}

double zeta(const SpaceFormParams& sf, double u) {
  check_u(sf, u);
  return detail::zeta(sf.K, u);
}

double zeta_inverse(const SpaceFormParams& sf, double rho) {
  check_rho(sf, rho);
  if (sf.K == 0) return 1.0 / rho;
  if (sf.K == 1) return 1.0 / std::tan(rho);
  return 1.0 / std::tanh(rho);
}

// For all three branches zeta'(u) = -1/(u^2 + K) and zeta''(u) = 2u/(u^2 + K)^2.
double zeta_prime(const SpaceFormParams& sf, double u) {
  check_u(sf, u);
  return -1.0 / (u * u + sf.K);
}

double zeta_second(const SpaceFormParams& sf, double u) {
  check_u(sf, u);
  const double s = u * u + sf.K;
  return 2.0 * u / (s * s);
}

double eta(const SpaceFormParams& sf, double v) {
  check_v(sf, v);
  return detail::eta(sf.K, v);
}

double eta_inverse(const SpaceFormParams& sf, double u) {
  check_u(sf, u);
  return detail::eta_inverse(sf.K, u);
}

double eta_prime(const SpaceFormParams& sf, double v) {
  check_v(sf, v);
  return detail::eta_prime(sf.K, v);
}

double eta_second(const SpaceFormParams& sf, double v) {
  check_v(sf, v);
  return detail::eta(sf.K, v);
}

double eta_third(const SpaceFormParams& sf, double v) {
  check_v(sf, v);
  return detail::eta_prime(sf.K, v);
}

double xi(const SpaceFormParams& sf, double v) {
  if (sf.K == 1) throw UnsupportedError("xi is defined only for K = 0 and K = -1");
  check_v(sf, v);
  return sf.K == 0 ? std::exp(2.0 * v) : std::sinh(v);
}

double xi_prime(const SpaceFormParams& sf, double v) {
  if (sf.K == 1) throw UnsupportedError("xi is defined only for K = 0 and K = -1");
  check_v(sf, v);
  return sf.K == 0 ? 2.0 * std::exp(2.0 * v) : std::cosh(v);
}

double phi_t(double t, double rho) {
  check_t(t);
  if (t == 0.0) {
    if (!(rho > 0.0)) range_error("rho", rho, 0.0, kInf);
    return rho;
  }
  const double upper = std::numbers::pi / (2.0 * t);
  if (!(rho > 0.0 && rho < upper)) range_error("rho", rho, 0.0, upper);
  return std::sin(t * rho) / t;
}

double phi_t_prime(double t, double rho) {
  check_t(t);
  if (t == 0.0) return 1.0;
  return std::cos(t * rho);
}

double zeta_t(double t, double u) {
  check_t(t);
  if (!(u > 0.0)) range_error("u", u, 0.0, kInf);
  return detail::zeta_t(t, u);
}

double zeta_t_prime(double t, double u) {
  check_t(t);
  if (!(u > 0.0)) range_error("u", u, 0.0, kInf);
  return -1.0 / (u * u + t * t);
}

double zeta_t_second(double t, double u) {
  check_t(t);
  if (!(u > 0.0)) range_error("u", u, 0.0, kInf);
  const double s = u * u + t * t;
  return 2.0 * u / (s * s);
}

double capital_phi(const SpaceFormParams& sf, double rho) {
  check_rho(sf, rho);
  if (sf.K == 0) return 0.5 * rho * rho;
  if (sf.K == 1) return 1.0 - std::cos(rho);
  return std::cosh(rho) - 1.0;
}

Warp warp(const SpaceFormParams& sf, double u) {
  Warp w;
  w.c = sf.K;
  w.u = u;
  w.rho = zeta(sf, u);
  // phi(zeta(u)) = 1/sqrt(u^2 + K), phi'(zeta(u)) = u/sqrt(u^2 + K).
  const double s = std::sqrt(u * u + sf.K);
  w.phi = 1.0 / s;
  w.dphi = u / s;
  w.dzeta = zeta_prime(sf, u);
  w.ddzeta = zeta_second(sf, u);
  return w;
}

Warp deformed_warp(double t, double u) {
  Warp w;
  w.c = t * t;
  w.u = u;
  w.rho = zeta_t(t, u);
  const double s = std::sqrt(u * u + t * t);
  w.phi = 1.0 / s;
  w.dphi = u / s;
  w.dzeta = zeta_t_prime(t, u);
  w.ddzeta = zeta_t_second(t, u);
  return w;
}

}  // namespace radgraph::spaceform
