#pragma once

// Linearization of G = f(kappa) = sigma_k^{1/k}(kappa) with respect to the 2-jet of the
// unknown, and assembly of the discrete Newton system.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "radgraph/curvature.hpp"
#include "radgraph/sphere_chart.hpp"

namespace radgraph::linearization {

/// Frame components: derivatives of G with respect to nabla'^2 x (Gij), nabla' x (Gs)
/// and x (Gu), plus the matching derivatives of the right-hand side.
struct LinearizedCoefficients {
  double G = 0.0;
  Eigen::MatrixXd Gij;
  Eigen::VectorXd Gs;
  double Gu = 0.0;
  Eigen::VectorXd psi_s;
  double psi_u = 0.0;
};

/// Analytic u-form coefficients at an admissible state.
LinearizedCoefficients coefficients_u(const curvature::GeometryState& state, int k);

/// v-form coefficients: Gij and Gs by the chain rule through u = eta(v); Gv from the
/// closed form K/(w~ eta') sum f_i + (eta/eta') F^{ij} a_ij whenever the substitution
/// matches the background, otherwise by the chain rule.
LinearizedCoefficients coefficients_v(const curvature::GeometryState& state, const curvature::FrameJet& v,
                                      const curvature::Background& bg, int k);

/// The chain-rule value of Gv (independent of the closed form).
double gv_chain_rule(const curvature::GeometryState& state, const curvature::FrameJet& v,
                     const curvature::Background& bg, int k);
/// Closed form of Gv; requires bg.c == bg.eta_K.
double gv_closed_form(const curvature::GeometryState& state, const curvature::FrameJet& v,
                      const curvature::Background& bg, int k);

/// Attach the right-hand side derivatives, given with respect to the value and the
/// chart-coordinate gradient of the unknown.
void set_rhs_derivatives(LinearizedCoefficients& c, double psi_u, const Eigen::VectorXd& psi_grad_coord,
                         const chart::PointGeometry& g);

/// Derivatives of G - psi with respect to the coordinate jet (x, d_k x, d_kl x).
struct CoordinateCoefficients {
  double d_u = 0.0;
  Eigen::VectorXd d_grad;
  Eigen::MatrixXd d_hess;
};

CoordinateCoefficients to_coordinates(const LinearizedCoefficients& c, const chart::PointGeometry& g);

/// G evaluated directly from a frame jet of the unknown in representation `rep`.
double operator_value(const curvature::FrameJet& x, chart::Representation rep, const curvature::Background& bg,
                      int k);

struct LinearSystem {
  Eigen::SparseMatrix<double> J;
  Eigen::VectorXd rhs;
  std::vector<int> unknown_nodes;  // row/column -> node id; boundary nodes are eliminated
};

/// J delta = -residual over the interior unknowns; `coeffs` and `residual` are indexed
/// like grid.interior().
LinearSystem assemble_system(const chart::Grid& grid, const std::vector<CoordinateCoefficients>& coeffs,
                             const Eigen::VectorXd& residual);

/// Sparse LU solve; throws AssemblyError when the matrix is singular.
Eigen::VectorXd solve(const LinearSystem& system);

struct MonotonicityReport {
  std::vector<double> t;
  int nodes_checked = 0;
  int nodes_skipped = 0;        // not admissible for some sampled t
  double worst_violation = 0.0; // max over nodes and consecutive t of G^{t1} - G^{t2}
  int worst_node = -1;
  double min_fd_slope = 0.0;    // min over nodes and t of the central FD of G^t in t
  bool monotone = true;         // worst_violation <= tolerance
};

/// Check G^{t2}[u] >= G^{t1}[u] - tol for t1 < t2 at every interior node. The field must be
/// in the u representation or in v with u = e^v.
MonotonicityReport deformed_monotonicity_check(const chart::GraphField& field, const std::vector<double>& ts,
                                               int k, double tol = 1e-12);

}  // namespace radgraph::linearization
