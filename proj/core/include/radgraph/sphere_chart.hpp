#pragma once

// Coordinate charts on S^n, structured grids over a domain Omega in one chart,
// and finite-difference covariant calculus on those grids.
//
// Two charts are supported:
//   Gnomonic:      radial projection of the open hemisphere about `center` onto its
//                  tangent plane. sigma^{ij} = mu^2 (delta_ij + y_i y_j), mu = sqrt(1 + |y|^2).
//   PlaneMinusOne: radial projection from the north pole onto R^n x {-1}.
//                  sigma_ij = 16/mu^2 delta_ij, mu = 4 + |x|^2.
//
// Grids are uniform lattices y = h * index. Cap domains get their boundary points at the
// exact intersections of lattice lines (and lattice diagonals) with the domain boundary;
// interior nodes near the boundary use the matching non-uniform stencils. Mask domains
// use the staircase boundary of the mask itself.

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace radgraph::chart {

enum class ChartKind { Gnomonic, PlaneMinusOne };

std::string to_string(ChartKind kind);
ChartKind chart_kind_from_string(const std::string& s);

class Chart {
 public:
  /// Gnomonic chart about `center` (unit vector in R^{n+1}; defaults to e_{n+1}).
  static Chart gnomonic(int n, const Eigen::VectorXd& center = Eigen::VectorXd());
  static Chart plane_minus_one(int n);

  ChartKind kind() const { return kind_; }
  int dim() const { return n_; }
  /// Gnomonic: tangency point. PlaneMinusOne: the south pole (image of x = 0).
  const Eigen::VectorXd& center() const { return center_; }

  /// Point of S^n (in R^{n+1}) with chart coordinates y.
  Eigen::VectorXd to_sphere(const Eigen::VectorXd& y) const;
  /// Chart coordinates of z; throws DomainError outside the chart.
  Eigen::VectorXd from_sphere(const Eigen::VectorXd& z) const;
  bool covers(const Eigen::VectorXd& z) const;

  /// Chart-coordinate radius of the geodesic cap of radius theta0 about center().
  double cap_radius(double theta0) const;

 private:
  Chart(ChartKind kind, int n, Eigen::VectorXd center);

  ChartKind kind_;
  int n_;
  Eigen::VectorXd center_;
  Eigen::MatrixXd rotation_;  // orthonormal, last column = center_ (gnomonic)
};

struct ChartMetric {
  Eigen::MatrixXd sigma;      // sigma_ij
  Eigen::MatrixXd sigma_inv;  // sigma^{ij}
  double mu = 1.0;
};

ChartMetric chart_metric(const Chart& chart, const Eigen::VectorXd& y);

/// Christoffel symbols: result[k](i, j) = Gamma_ij^k.
std::vector<Eigen::MatrixXd> christoffel(const Chart& chart, const Eigen::VectorXd& y);

/// Symmetric sigma^{-1/2}; its columns are a sigma-orthonormal frame.
Eigen::MatrixXd orthonormal_frame(const Chart& chart, const Eigen::VectorXd& y);

/// Everything chart-related a node needs, computed once per node.
struct PointGeometry {
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  ChartMetric metric;
  std::vector<Eigen::MatrixXd> gamma;
  Eigen::MatrixXd frame;  // sigma^{-1/2}
};

PointGeometry point_geometry(const Chart& chart, const Eigen::VectorXd& y);

// ---------------------------------------------------------------------------
// Grid

enum class NodeClass { Interior, Boundary, Exterior };

std::string to_string(NodeClass c);

struct Node {
  NodeClass cls = NodeClass::Interior;
  Eigen::VectorXd y;
  std::vector<int> lattice;  // empty for off-lattice boundary points
};

/// Linear weights of one stencil point: grad += value * wg, hess += value * wh.
struct StencilPoint {
  int node = -1;
  Eigen::VectorXd wg;
  Eigen::MatrixXd wh;
};

struct Stencil {
  int center = -1;
  bool regular = true;  // true iff it is the plain central-difference stencil
  std::vector<StencilPoint> points;  // includes the center
};

struct DomainSpec {
  enum class Kind { Cap, Mask };
  Kind kind = Kind::Cap;
  double theta0 = 0.0;
  std::vector<std::vector<int>> mask;  // lattice indices of mask nodes
};

/// Boolean lattice over an index box [lo, hi] (inclusive), row-major with axis 0 slowest.
struct Mask {
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<char> inside;

  std::size_t flat(const std::vector<int>& idx) const;
  bool contains(const std::vector<int>& idx) const;
  bool at(const std::vector<int>& idx) const { return contains(idx) && inside[flat(idx)] != 0; }
};

class Grid {
 public:
  const Chart& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }
  double spacing() const { return h_; }
  const DomainSpec& domain() const { return domain_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<int>& interior() const { return interior_; }
  const std::vector<int>& boundary() const { return boundary_; }

  /// Position of an interior node among interior(), or -1.
  int unknown_index(int node) const { return unknown_[static_cast<std::size_t>(node)]; }
  const Stencil& stencil(int node) const;
  const PointGeometry& geometry(int node) const { return geometry_[static_cast<std::size_t>(node)]; }

  /// Lattice index -> node id (or -1 when exterior / not a lattice node).
  int lattice_node(const std::vector<int>& idx) const;

  /// Interior nodes whose stencil reaches a boundary point.
  std::vector<int> boundary_adjacent() const;

  /// Boundary point -> interior node it was cut from and the unit lattice direction
  /// pointing from that node toward the boundary point.
  struct BoundaryLink {
    int owner = -1;
    Eigen::VectorXd direction;
  };
  const BoundaryLink& boundary_link(int node) const;

 private:
  friend std::shared_ptr<const Grid> build_cap_domain(double, double, const Chart&);
  friend std::shared_ptr<const Grid> build_from_mask(const Mask&, double, const Chart&, double);
  friend class GridBuilder;

  Grid(Chart chart, double h) : chart_(std::move(chart)), h_(h) {}

  Chart chart_;
  double h_;
  DomainSpec domain_;
  std::vector<Node> nodes_;
  std::vector<int> interior_;
  std::vector<int> boundary_;
  std::vector<int> unknown_;
  std::vector<Stencil> stencils_;  // indexed by unknown_index
  std::vector<PointGeometry> geometry_;
  std::map<std::vector<int>, int> lattice_;
  std::map<int, BoundaryLink> links_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Geodesic cap {dist(z, chart.center()) < theta0}; requires 0 < theta0 < pi/2.
GridPtr build_cap_domain(double theta0, double h, const Chart& chart);
inline GridPtr build_cap_domain(double theta0, double h) {
  return build_cap_domain(theta0, h, Chart::gnomonic(2));
}

/// Domain given by a lattice mask. Every mask node must lie in the chart disk
/// |y| < chart_disk_radius (the image of a cap of radius < pi/2).
GridPtr build_from_mask(const Mask& mask, double h, const Chart& chart,
                        double chart_disk_radius = -1.0);

// ---------------------------------------------------------------------------
// Fields

enum class Representation { Rho, U, V };

std::string to_string(Representation r);
Representation representation_from_string(const std::string& s);

struct GraphField {
  GridPtr grid;
  Eigen::VectorXd values;  // one per node (interior + boundary)
  Representation rep = Representation::U;

  double operator[](int node) const { return values(node); }
};

GraphField make_field(GridPtr grid, Representation rep, double fill = 0.0);

/// Coordinate derivatives at a node: value, d_i, d_ij.
struct Jet {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

/// Finite-difference jet at an interior node.
Jet jet(const GraphField& field, int node);
Jet jet(const Grid& grid, const Eigen::VectorXd& values, int node);

/// grad_k u (chart components) and |grad' u|^2 = sigma^{ij} u_i u_j.
Eigen::VectorXd gradient(const GraphField& field, int node);
double gradient_norm_sq(const GraphField& field, int node);

/// nabla'_ij u = d_ij u - Gamma_ij^k d_k u.
Eigen::MatrixXd covariant_hessian(const GraphField& field, int node);
Eigen::MatrixXd covariant_hessian(const Jet& j, const PointGeometry& g);

enum class ConvexityPath { Direct, Tilde };

/// nabla'^2 u + u sigma in chart components. Direct: covariant Hessian of the node values.
/// Tilde: finite differences of u~ = mu u through the chart identity
/// (gnomonic: mu^{-1} u~_ij; plane: mu^{-1} u~_ij + 2 delta_ij mu^{-2} (u~ - x.Du~)).
Eigen::MatrixXd convexity_matrix(const GraphField& field, int node,
                                 ConvexityPath path = ConvexityPath::Direct);

/// The same two routes applied to one exact jet of u (no discretization in between):
/// Tilde rebuilds the derivatives of u~ = mu u analytically from the jet.
Eigen::MatrixXd convexity_matrix(const Jet& u, const PointGeometry& g, const Chart& chart,
                                 ConvexityPath path);

/// Grid file: structured text header (chart, center, n, h, domain) plus node table.
struct GridFileExtras {
  int space_form = 0;
  bool has_space_form = false;
};
void write_grid(std::ostream& os, const GraphField& field, const GridFileExtras& extras = {});
GraphField read_grid(std::istream& is, GridFileExtras* extras = nullptr);

}  // namespace radgraph::chart
