#pragma once

// Pointwise geometry of a radial graph over a chart node. Everything here is expressed in
// the sigma-orthonormal frame given by the columns of sigma^{-1/2}; chart-coordinate jets
// are moved into that frame by frame_jet().

#include <Eigen/Dense>

#include "radgraph/spaceform.hpp"
#include "radgraph/sphere_chart.hpp"

namespace radgraph::curvature {

/// Value, first and covariant second derivatives of a scalar in frame components.
struct FrameJet {
  double value = 0.0;
  Eigen::VectorXd p;  // nabla' x
  Eigen::MatrixXd r;  // nabla'^2 x
};

FrameJet frame_jet(const chart::Jet& j, const chart::PointGeometry& g);

/// Background in which the graph lives: the warp curvature c (K, or t^2 for the deformed
/// sphere family) and the substitution u = eta(v) used by the v representation.
struct Background {
  double c = 0.0;
  int eta_K = 0;
  double t = -1.0;  // deformation parameter, or -1 for a space form
  int K = 0;        // space form label (ignored when deformed)

  static Background space_form(int K);
  /// phi^t geometry with the exponential substitution u = e^v.
  static Background deformed(double t);

  bool is_deformed() const { return t >= 0.0; }
  spaceform::Warp warp(double u) const;
  bool u_admissible(double u) const;
  /// u = eta(v) and its first three derivatives.
  double eta(double v) const;
  double eta_prime(double v) const;
  double eta_second(double v) const { return eta(v); }
  double eta_third(double v) const { return eta_prime(v); }
  double eta_inverse(double u) const;
};

/// Convert a jet of rho or v into the jet of u = zeta^{-1}(rho) resp. eta(v).
FrameJet u_jet_from_rho(const FrameJet& rho, int K);
FrameJet u_jet_from_v(const FrameJet& v, const Background& bg);

struct GeometryState {
  int n = 0;
  spaceform::Warp warp;
  FrameJet u;                 // jet of u in frame components
  Eigen::MatrixXd g;          // g_ij
  Eigen::MatrixXd g_inv;      // g^ij
  Eigen::MatrixXd gamma_down; // gamma_ij, gamma^2 = g
  Eigen::MatrixXd gamma_up;   // gamma^ij = gamma_down^{-1}
  Eigen::MatrixXd h;          // second fundamental form
  Eigen::MatrixXd a;          // curvature matrix
  Eigen::VectorXd kappa;      // principal curvatures, descending
  Eigen::MatrixXd kappa_vectors;
  Eigen::MatrixXd convexity;  // nabla'^2 u + u I
  double grad_norm_sq = 0.0;  // |nabla' u|^2
  double w = 0.0;             // sqrt(phi^2 + zeta'^2 |nabla' u|^2)
  double tau = 0.0;           // support function
  double nu_rad = 0.0;        // radial component of the unit normal
  Eigen::VectorXd nu_tan;     // tangential unit-normal components
};

/// u-form: a = (-zeta' phi / w) gamma^{up} (nabla'^2 u + u I) gamma^{up}.
GeometryState geometry_u(const FrameJet& u, const spaceform::Warp& warp);
GeometryState geometry_u(const FrameJet& u, const spaceform::SpaceFormParams& sf);
GeometryState geometry_u(const FrameJet& u, const Background& bg);

/// v-form: a = (1/w~)(eta I + eta' gamma~ nabla'^2 v gamma~), w~ = sqrt(1 + |nabla' v|^2).
/// The metric quantities are filled from the u jet; a and kappa come from the v formula.
GeometryState geometry_v(const FrameJet& v, const Background& bg);
GeometryState geometry_v(const FrameJet& v, const spaceform::SpaceFormParams& sf);

/// phi^t background with c = t^2; t = 1 is the sphere and t = 0 flat space.
GeometryState geometry_deformed(const FrameJet& u, double t);

/// Geometry of a stored field at an interior node, whatever its representation.
GeometryState geometry(const chart::GraphField& field, int node, const Background& bg);
GeometryState geometry_from_u(const chart::GraphField& field, int node, const spaceform::SpaceFormParams& sf);
GeometryState geometry_from_v(const chart::GraphField& field, int node, const spaceform::SpaceFormParams& sf);
GeometryState geometry_deformed(const chart::GraphField& field, int node, double t);

// ---------------------------------------------------------------------------
// Symmetric functions and cones

/// (sigma_0, sigma_1, ..., sigma_n) by the incremental product recurrence.
Eigen::VectorXd all_sigmas(const Eigen::VectorXd& kappa);
double sigma_k(const Eigen::VectorXd& kappa, int k);
/// sigma_m of kappa with entry i removed.
double sigma_excluding(const Eigen::VectorXd& kappa, int m, int i);

struct ConeReport {
  int k = 0;
  Eigen::VectorXd sigmas;  // sigma_1 .. sigma_k
  bool in_gamma_k = false;
  bool strictly_locally_convex = false;
  double margin = 0.0;     // min kappa_i
};

ConeReport cone_check(const Eigen::VectorXd& kappa, int k);

struct FDerivatives {
  double f = 0.0;
  Eigen::VectorXd fi;
};

/// f = sigma_k^{1/k} and f_i = (1/k) sigma_k^{1/k - 1} sigma_{k-1}(kappa | i).
FDerivatives f_and_derivatives(const Eigen::VectorXd& kappa, int k);

struct FMatrix {
  double f = 0.0;
  Eigen::VectorXd kappa;
  Eigen::VectorXd fi;
  Eigen::MatrixXd F;  // Q diag(f_i) Q^T
};

FMatrix F_matrix(const Eigen::MatrixXd& a, int k);
/// Same, reusing the eigen-decomposition stored in a geometry state.
FMatrix F_matrix(const GeometryState& state, int k);

double support_function(const GeometryState& state);

}  // namespace radgraph::curvature
