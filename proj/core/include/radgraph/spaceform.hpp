#pragma once

// The three space forms N^{n+1}(K) modelled on R^{n+1} with the warped metric
// d rho^2 + phi(rho)^2 sigma, the substitutions rho = zeta(u), u = eta(v),
// and the spherical deformation family phi^t(rho) = sin(t rho)/t.

#include <cmath>
#include <limits>

namespace radgraph::spaceform {

struct SpaceFormParams {
  int K = 0;
  // Range checks are strict with this margin so derivative formulas stay finite.
  double margin = 1e-12;

  static SpaceFormParams make(int K, double margin = 1e-12);
};

struct VariableRanges {
  double rho_upper;  // +inf for K = 0, -1
  double u_lower;
  double v_lower;    // -inf for K = 0
};

VariableRanges ranges(const SpaceFormParams& sf);

// Throw DomainError unless the value is strictly inside the corresponding range.
void check_rho(const SpaceFormParams& sf, double rho);
void check_u(const SpaceFormParams& sf, double u);
void check_v(const SpaceFormParams& sf, double v);
bool u_in_range(const SpaceFormParams& sf, double u);
bool v_in_range(const SpaceFormParams& sf, double v);

double phi(const SpaceFormParams& sf, double rho);
double phi_prime(const SpaceFormParams& sf, double rho);

double zeta(const SpaceFormParams& sf, double u);
double zeta_inverse(const SpaceFormParams& sf, double rho);
double zeta_prime(const SpaceFormParams& sf, double u);
double zeta_second(const SpaceFormParams& sf, double u);

double eta(const SpaceFormParams& sf, double v);
double eta_inverse(const SpaceFormParams& sf, double u);
double eta_prime(const SpaceFormParams& sf, double v);
double eta_second(const SpaceFormParams& sf, double v);
double eta_third(const SpaceFormParams& sf, double v);

// Auxiliary weight of the two-step continuation; K = +1 throws UnsupportedError.
double xi(const SpaceFormParams& sf, double v);
double xi_prime(const SpaceFormParams& sf, double v);

// Deformation family; t = 0 is the exact Euclidean limit.
double phi_t(double t, double rho);
double phi_t_prime(double t, double rho);
double zeta_t(double t, double u);
double zeta_t_prime(double t, double u);
double zeta_t_second(double t, double u);

// Phi(rho) = int_0^rho phi.
double capital_phi(const SpaceFormParams& sf, double rho);

/// Warping data along the graph at a point, expressed through u:
/// phi and phi' evaluated at rho = zeta(u), and zeta', zeta''.
/// `c` is the sectional curvature of the background (K, or t^2 for the deformation).
struct Warp {
  double c = 0.0;
  double u = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
  double dzeta = 0.0;
  double ddzeta = 0.0;
  double rho = 0.0;
};

Warp warp(const SpaceFormParams& sf, double u);
Warp deformed_warp(double t, double u);

namespace detail {

// Unchecked kernels shared by double and Dual evaluation.
template <class T>
T zeta(int K, const T& u) {
  using std::atan;
  using std::atanh;
  if (K == 0) return T(1.0) / u;
  if (K == 1) return atan(T(1.0) / u);
  return atanh(T(1.0) / u);
}

template <class T>
T eta(int K, const T& v) {
  using std::cosh;
  using std::exp;
  using std::sinh;
  if (K == 0) return exp(v);
  if (K == 1) return sinh(v);
  return cosh(v);
}

template <class T>
T eta_prime(int K, const T& v) {
  using std::cosh;
  using std::exp;
  using std::sinh;
  if (K == 0) return exp(v);
  if (K == 1) return cosh(v);
  return sinh(v);
}

template <class T>
T eta_inverse(int K, const T& u) {
  using std::acosh;
  using std::asinh;
  using std::log;
  if (K == 0) return log(u);
  if (K == 1) return asinh(u);
  return acosh(u);
}

// zeta^t(u) = (1/t) arccot(u/t), with the t = 0 limit 1/u.
template <class T>
T zeta_t(double t, const T& u) {
  using std::atan;
  if (t == 0.0) return T(1.0) / u;
  return atan(T(t) / u) / T(t);
}

}  // namespace detail

}  // namespace radgraph::spaceform
