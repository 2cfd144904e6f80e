#pragma once

#include <nlohmann/json.hpp>

#include "radgraph/curvature.hpp"
#include "radgraph/sphere_chart.hpp"

namespace radgraph::diagnostics {

struct DiagnosticsOptions {
  double N = 10.0;  // weight of -ln tau in Theta
  int k = 2;
};

struct DiagnosticsRecord {
  double min_kappa = 0.0;
  double max_kappa = 0.0;
  double min_convexity_det = 0.0;  // det(nabla'^2 u + u I) in the frame
  double min_convexity_eig = 0.0;
  double min_tau = 0.0;
  double max_theta = 0.0;          // 1/2 ln sum kappa^2 - N ln tau + beta Phi(rho)
  double min_u = 0.0;
  double max_u = 0.0;
  double sup_u_estimate = 0.0;     // max u refined by the quadratic model at interior maxima
  double max_w_interior = 0.0;     // sqrt(u^2 + |nabla' u|^2) over interior nodes
  double max_w_trace = 0.0;        // estimate of sup over the boundary of the same quantity
  double c1_gap = 0.0;             // max_w_interior - max(sup_u_estimate, max_w_trace)
  bool c1_ok = true;
  bool all_admissible = true;
};

/// The field may be in any representation understood by curvature::geometry for `bg`.
/// beta is u_L^K (1 for K = -1, else 0); the deformed background has beta = 0.
DiagnosticsRecord diagnostics_monitor(const chart::GraphField& field, const curvature::Background& bg,
                                      const DiagnosticsOptions& opts = {});

nlohmann::json to_json(const DiagnosticsRecord& d);

}  // namespace radgraph::diagnostics
