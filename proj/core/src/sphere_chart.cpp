#include "radgraph/sphere_chart.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "radgraph/errors.hpp"

namespace radgraph::chart {

namespace {

// Boundary cut points closer than this fraction of h to an interior node would make
// the non-uniform stencils ill-conditioned; such lattice nodes are moved to the boundary.
constexpr double kBandFraction = 1e-3;

Eigen::MatrixXd householder_to(const Eigen::VectorXd& target) {
  // Orthogonal matrix whose last column is `target` (unit vector).
  const Eigen::Index m = target.size();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
  e(m - 1) = 1.0;
  Eigen::VectorXd v = e - target;
  const double nv = v.norm();
  if (nv < 1e-15) return Eigen::MatrixXd::Identity(m, m);
  v /= nv;
  return Eigen::MatrixXd::Identity(m, m) - 2.0 * v * v.transpose();
}

}  // namespace

std::string to_string(ChartKind kind) {
  return kind == ChartKind::Gnomonic ? "gnomonic" : "plane";
}

ChartKind chart_kind_from_string(const std::string& s) {
  if (s == "gnomonic") return ChartKind::Gnomonic;
  if (s == "plane" || s == "plane_minus_one") return ChartKind::PlaneMinusOne;
  throw DomainError("unknown chart kind '" + s + "'");
}

std::string to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Interior:
      return "interior";
    case NodeClass::Boundary:
      return "boundary";
    default:
      return "exterior";
  }
}

std::string to_string(Representation r) {
  switch (r) {
    case Representation::Rho:
      return "rho";
    case Representation::U:
      return "u";
    default:
      return "v";
  }
}

Representation representation_from_string(const std::string& s) {
  if (s == "rho") return Representation::Rho;
  if (s == "u") return Representation::U;
  if (s == "v") return Representation::V;
  throw DomainError("unknown representation '" + s + "'");
}

// ---------------------------------------------------------------------------
// Chart

Chart::Chart(ChartKind kind, int n, Eigen::VectorXd center)
    : kind_(kind), n_(n), center_(std::move(center)) {
  rotation_ = householder_to(center_);
}

Chart Chart::gnomonic(int n, const Eigen::VectorXd& center) {
  if (n < 1) throw DomainError("chart dimension must be positive");
  Eigen::VectorXd c = center;
  if (c.size() == 0) {
    c = Eigen::VectorXd::Zero(n + 1);
    c(n) = 1.0;
  }
  if (c.size() != n + 1) throw DomainError("chart center must have n + 1 components");
  const double norm = c.norm();
  if (!(norm > 0.0)) throw DomainError("chart center must be nonzero");
  return Chart(ChartKind::Gnomonic, n, c / norm);
}

Chart Chart::plane_minus_one(int n) {
  if (n < 1) throw DomainError("chart dimension must be positive");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c(n) = -1.0;
  Chart chart(ChartKind::PlaneMinusOne, n, c);
  chart.rotation_ = Eigen::MatrixXd::Identity(n + 1, n + 1);
  return chart;
}

Eigen::VectorXd Chart::to_sphere(const Eigen::VectorXd& y) const {
  if (y.size() != n_) throw DomainError("chart coordinate has wrong dimension");
  Eigen::VectorXd z(n_ + 1);
  if (kind_ == ChartKind::Gnomonic) {
    z.head(n_) = y;
    z(n_) = 1.0;
    z /= std::sqrt(1.0 + y.squaredNorm());
    return rotation_ * z;
  }
  const double r2 = y.squaredNorm();
  const double mu = 4.0 + r2;
  z.head(n_) = 4.0 * y / mu;
  z(n_) = (r2 - 4.0) / mu;
  return z;
}

bool Chart::covers(const Eigen::VectorXd& z) const {
  if (z.size() != n_ + 1) return false;
  if (kind_ == ChartKind::Gnomonic) return z.dot(center_) > 0.0;
  return z(n_) < 1.0;
}

Eigen::VectorXd Chart::from_sphere(const Eigen::VectorXd& z) const {
  if (!covers(z)) throw DomainError("point is outside the chart");
  if (kind_ == ChartKind::Gnomonic) {
    const Eigen::VectorXd w = rotation_.transpose() * z;
    return w.head(n_) / w(n_);
  }
  return 2.0 * z.head(n_) / (1.0 - z(n_));
}

double Chart::cap_radius(double theta0) const {
  if (kind_ == ChartKind::Gnomonic) return std::tan(theta0);
  return 2.0 * std::tan(0.5 * theta0);
}

ChartMetric chart_metric(const Chart& chart, const Eigen::VectorXd& y) {
  const int n = chart.dim();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  ChartMetric m;
  if (chart.kind() == ChartKind::Gnomonic) {
    const double mu2 = 1.0 + y.squaredNorm();
    m.mu = std::sqrt(mu2);
    m.sigma_inv = mu2 * (id + y * y.transpose());
    m.sigma = (id - y * y.transpose() / mu2) / mu2;
  } else {
    m.mu = 4.0 + y.squaredNorm();
    m.sigma = (16.0 / (m.mu * m.mu)) * id;
    m.sigma_inv = (m.mu * m.mu / 16.0) * id;
  }
  return m;
}

std::vector<Eigen::MatrixXd> christoffel(const Chart& chart, const Eigen::VectorXd& y) {
  const int n = chart.dim();
  std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
  if (chart.kind() == ChartKind::Gnomonic) {
    const double mu2 = 1.0 + y.squaredNorm();
    for (int k = 0; k < n; ++k) {
      auto& G = gamma[static_cast<std::size_t>(k)];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          G(i, j) = -((i == k ? y(j) : 0.0) + (j == k ? y(i) : 0.0)) / mu2;
    }
  } else {
    const double mu = 4.0 + y.squaredNorm();
    for (int k = 0; k < n; ++k) {
      auto& G = gamma[static_cast<std::size_t>(k)];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          G(i, j) = -(2.0 / mu) *
                    ((i == k ? y(j) : 0.0) + (j == k ? y(i) : 0.0) - (i == j ? y(k) : 0.0));
    }
  }
  return gamma;
}

Eigen::MatrixXd orthonormal_frame(const Chart& chart, const Eigen::VectorXd& y) {
  const int n = chart.dim();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  if (chart.kind() == ChartKind::Gnomonic) {
    const double mu = std::sqrt(1.0 + y.squaredNorm());
    return mu * (id + y * y.transpose() / (1.0 + mu));
  }
  return (0.25 * (4.0 + y.squaredNorm())) * id;
}

PointGeometry point_geometry(const Chart& chart, const Eigen::VectorXd& y) {
  PointGeometry g;
  g.y = y;
  g.z = chart.to_sphere(y);
  g.metric = chart_metric(chart, y);
  g.gamma = christoffel(chart, y);
  g.frame = orthonormal_frame(chart, y);
  return g;
}

// ---------------------------------------------------------------------------
// Mask

bool Mask::contains(const std::vector<int>& idx) const {
  if (idx.size() != lo.size()) return false;
  for (std::size_t d = 0; d < idx.size(); ++d)
    if (idx[d] < lo[d] || idx[d] > hi[d]) return false;
  return true;
}

std::size_t Mask::flat(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (std::size_t d = 0; d < idx.size(); ++d)
    f = f * static_cast<std::size_t>(hi[d] - lo[d] + 1) + static_cast<std::size_t>(idx[d] - lo[d]);
  return f;
}

// ---------------------------------------------------------------------------
// Grid construction

namespace {

// Sparse linear form over node values.
using Lin = std::map<int, double>;

void axpy(Lin& out, double a, const Lin& x) {
  for (const auto& [k, v] : x) out[k] += a * v;
}

std::vector<std::vector<int>> lattice_box(int n, int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(static_cast<std::size_t>(n), -m);
  while (true) {
    out.push_back(idx);
    int d = n - 1;
    while (d >= 0 && idx[static_cast<std::size_t>(d)] == m) {
      idx[static_cast<std::size_t>(d)] = -m;
      --d;
    }
    if (d < 0) break;
    ++idx[static_cast<std::size_t>(d)];
  }
  return out;
}

Eigen::VectorXd lattice_point(const std::vector<int>& idx, double h) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t d = 0; d < idx.size(); ++d) y(static_cast<Eigen::Index>(d)) = h * idx[d];
  return y;
}

std::vector<int> shifted(const std::vector<int>& idx, const std::vector<int>& dir) {
  std::vector<int> out = idx;
  for (std::size_t d = 0; d < idx.size(); ++d) out[d] += dir[d];
  return out;
}

}  // namespace

class GridBuilder {
 public:
  GridBuilder(Chart chart, double h) : grid_(new Grid(std::move(chart), h)) {}

  int add_node(NodeClass cls, const Eigen::VectorXd& y, std::vector<int> lattice) {
    Node node;
    node.cls = cls;
    node.y = y;
    node.lattice = std::move(lattice);
    const int id = static_cast<int>(grid_->nodes_.size());
    if (!node.lattice.empty()) grid_->lattice_[node.lattice] = id;
    grid_->nodes_.push_back(std::move(node));
    return id;
  }

  // One neighbour along lattice direction `dir`: node id and arm length in units of the
  // full lattice step (1 unless the segment leaves the domain).
  struct Arm {
    int node;
    double arm;
  };

  using Cutter = std::function<double(const Eigen::VectorXd& y, const Eigen::VectorXd& step)>;

  Arm arm(int center, const std::vector<int>& dir, const Cutter& cut) {
    Grid& g = *grid_;
    const Node& c = g.nodes_[static_cast<std::size_t>(center)];
    const auto target = shifted(c.lattice, dir);
    if (auto it = g.lattice_.find(target); it != g.lattice_.end()) {
      link(it->second, center, dir);
      return {it->second, 1.0};
    }
    if (!cut) {
      std::ostringstream os;
      os << "stencil of node " << center << " leaves the domain";
      throw AssemblyError(os.str(), center);
    }
    const Eigen::VectorXd step = lattice_point(dir, g.h_);
    const double s = cut(c.y, step);
    const int id = add_node(NodeClass::Boundary, c.y + s * step, {});
    link(id, center, dir);
    return {id, s};
  }

  void link(int boundary, int owner, const std::vector<int>& dir) {
    Grid& g = *grid_;
    if (g.nodes_[static_cast<std::size_t>(boundary)].cls != NodeClass::Boundary) return;
    if (g.links_.count(boundary)) return;
    Eigen::VectorXd d = lattice_point(dir, 1.0);
    g.links_[boundary] = {owner, d / d.norm()};
  }

  void build_stencil(int center, const Cutter& cut) {
    Grid& g = *grid_;
    const int n = g.dim();
    const double h = g.h_;
    std::vector<Lin> grad(static_cast<std::size_t>(n));
    std::vector<std::vector<Lin>> hess(static_cast<std::size_t>(n),
                                       std::vector<Lin>(static_cast<std::size_t>(n)));
    bool regular = true;

    for (int i = 0; i < n; ++i) {
      std::vector<int> dir(static_cast<std::size_t>(n), 0);
      dir[static_cast<std::size_t>(i)] = 1;
      const Arm plus = arm(center, dir, cut);
      dir[static_cast<std::size_t>(i)] = -1;
      const Arm minus = arm(center, dir, cut);
      regular = regular && plus.arm == 1.0 && minus.arm == 1.0;
      const double A = plus.arm * h;
      const double B = minus.arm * h;
      const double den = A * B * (A + B);
      Lin& gi = grad[static_cast<std::size_t>(i)];
      gi[plus.node] += B * B / den;
      gi[minus.node] += -A * A / den;
      gi[center] += (A * A - B * B) / den;
      Lin& hi = hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
      hi[plus.node] += 2.0 * B / den;
      hi[minus.node] += 2.0 * A / den;
      hi[center] += -2.0 * (A + B) / den;
    }

    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        Lin num;
        double den = 0.0;
        for (int si : {1, -1}) {
          for (int sj : {1, -1}) {
            std::vector<int> dir(static_cast<std::size_t>(n), 0);
            dir[static_cast<std::size_t>(i)] = si;
            dir[static_cast<std::size_t>(j)] = sj;
            const Arm a = arm(center, dir, cut);
            regular = regular && a.arm == 1.0;
            const double Di = a.arm * h * si;
            const double Dj = a.arm * h * sj;
            // Residual after removing the gradient and pure second-derivative terms.
            Lin r;
            r[a.node] += 1.0;
            r[center] -= 1.0;
            axpy(r, -Di, grad[static_cast<std::size_t>(i)]);
            axpy(r, -Dj, grad[static_cast<std::size_t>(j)]);
            axpy(r, -0.5 * Di * Di, hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)]);
            axpy(r, -0.5 * Dj * Dj, hess[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)]);
            axpy(num, Di * Dj, r);
            den += Di * Dj * Di * Dj;
          }
        }
        Lin hij;
        axpy(hij, 1.0 / den, num);
        hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = hij;
        hess[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = hij;
      }
    }

    std::map<int, StencilPoint> pts;
    auto point = [&](int id) -> StencilPoint& {
      auto it = pts.find(id);
      if (it == pts.end()) {
        StencilPoint sp;
        sp.node = id;
        sp.wg = Eigen::VectorXd::Zero(n);
        sp.wh = Eigen::MatrixXd::Zero(n, n);
        it = pts.emplace(id, sp).first;
      }
      return it->second;
    };
    point(center);
    for (int i = 0; i < n; ++i) {
      for (const auto& [id, w] : grad[static_cast<std::size_t>(i)]) point(id).wg(i) += w;
      for (int j = 0; j < n; ++j)
        for (const auto& [id, w] : hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
          point(id).wh(i, j) += w;
    }
    // Row sums vanish exactly, so constants are annihilated without roundoff.
    StencilPoint& c = pts.at(center);
    c.wg.setZero();
    c.wh.setZero();
    for (const auto& [id, sp] : pts) {
      if (id == center) continue;
      c.wg -= sp.wg;
      c.wh -= sp.wh;
    }
    Stencil st;
    st.center = center;
    st.regular = regular;
    st.points.push_back(pts.at(center));
    for (auto& [id, sp] : pts)
      if (id != center) st.points.push_back(sp);
    g.stencils_.push_back(std::move(st));
  }

  GridPtr finish(DomainSpec spec, const std::vector<int>& interior, const Cutter& cut) {
    Grid& g = *grid_;
    g.domain_ = std::move(spec);
    g.interior_ = interior;
    for (int id : interior) build_stencil(id, cut);
    g.unknown_.assign(g.nodes_.size(), -1);
    for (std::size_t k = 0; k < interior.size(); ++k)
      g.unknown_[static_cast<std::size_t>(interior[k])] = static_cast<int>(k);
    for (int id = 0; id < static_cast<int>(g.nodes_.size()); ++id)
      if (g.nodes_[static_cast<std::size_t>(id)].cls == NodeClass::Boundary) g.boundary_.push_back(id);
    g.geometry_.reserve(g.nodes_.size());
    for (const auto& node : g.nodes_) g.geometry_.push_back(point_geometry(g.chart_, node.y));
    return GridPtr(grid_.release());
  }

 private:
  std::unique_ptr<Grid> grid_;
};

const Stencil& Grid::stencil(int node) const {
  const int k = unknown_index(node);
  if (k < 0) {
    std::ostringstream os;
    os << "node " << node << " is not an interior node";
    throw AssemblyError(os.str(), node);
  }
  return stencils_[static_cast<std::size_t>(k)];
}

int Grid::lattice_node(const std::vector<int>& idx) const {
  auto it = lattice_.find(idx);
  return it == lattice_.end() ? -1 : it->second;
}

std::vector<int> Grid::boundary_adjacent() const {
  std::vector<int> out;
  for (int id : interior_) {
    const auto& st = stencil(id);
    for (const auto& p : st.points)
      if (node(p.node).cls == NodeClass::Boundary) {
        out.push_back(id);
        break;
      }
  }
  return out;
}

const Grid::BoundaryLink& Grid::boundary_link(int node) const {
  auto it = links_.find(node);
  if (it == links_.end()) {
    std::ostringstream os;
    os << "node " << node << " has no interior neighbour";
    throw DomainError(os.str());
  }
  return it->second;
}

GridPtr build_cap_domain(double theta0, double h, const Chart& chart) {
  if (!(theta0 > 0.0)) throw DomainError("cap radius must be positive");
  if (!(theta0 < std::numbers::pi / 2.0))
    throw DomainError("cap radius theta0 >= pi/2 contains a hemisphere; rejected");
  if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
  const int n = chart.dim();
  const double R = chart.cap_radius(theta0);
  const int m = static_cast<int>(std::ceil(R / h)) + 1;

  GridBuilder b(chart, h);
  std::vector<int> interior;
  for (const auto& idx : lattice_box(n, m)) {
    const Eigen::VectorXd y = lattice_point(idx, h);
    const double gap = R - y.norm();
    if (gap >= kBandFraction * h) {
      interior.push_back(b.add_node(NodeClass::Interior, y, idx));
    } else if (gap >= -1e-12 * R) {
      b.add_node(NodeClass::Boundary, y, idx);
    }
  }

  // Exact intersection of the segment y + s * step, s in (0, 1], with |y| = R.
  auto cut = [R](const Eigen::VectorXd& y, const Eigen::VectorXd& step) {
    const double a = step.squaredNorm();
    const double bq = y.dot(step);
    const double c = y.squaredNorm() - R * R;
    const double s = (-bq + std::sqrt(bq * bq - a * c)) / a;
    return std::clamp(s, 0.0, 1.0);
  };

  DomainSpec spec;
  spec.kind = DomainSpec::Kind::Cap;
  spec.theta0 = theta0;
  return b.finish(spec, interior, cut);
}

GridPtr build_from_mask(const Mask& mask, double h, const Chart& chart, double chart_disk_radius) {
  if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
  const int n = chart.dim();
  if (static_cast<int>(mask.lo.size()) != n || static_cast<int>(mask.hi.size()) != n)
    throw DomainError("mask dimension does not match the chart");
  if (chart_disk_radius <= 0.0)
    chart_disk_radius = chart.kind() == ChartKind::Gnomonic ? std::numeric_limits<double>::infinity()
                                                           : chart.cap_radius(std::numbers::pi / 2.0);

  std::vector<std::vector<int>> members;
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (std::size_t f = 0; f < mask.inside.size(); ++f) {
    if (!mask.inside[f]) continue;
    std::size_t rest = f;
    for (int d = n - 1; d >= 0; --d) {
      const auto ext = static_cast<std::size_t>(mask.hi[static_cast<std::size_t>(d)] -
                                                mask.lo[static_cast<std::size_t>(d)] + 1);
      idx[static_cast<std::size_t>(d)] = mask.lo[static_cast<std::size_t>(d)] + static_cast<int>(rest % ext);
      rest /= ext;
    }
    members.push_back(idx);
  }
  std::sort(members.begin(), members.end());
  if (members.empty()) throw DomainError("mask is empty");
  for (const auto& m : members) {
    if (!(lattice_point(m, h).norm() < chart_disk_radius))
      throw DomainError("mask node lies outside the admissible chart disk");
  }

  // Staircase: a mask node is interior iff its full stencil is inside the mask.
  auto full_stencil_inside = [&](const std::vector<int>& c) {
    for (int i = 0; i < n; ++i) {
      for (int s : {1, -1}) {
        std::vector<int> d(static_cast<std::size_t>(n), 0);
        d[static_cast<std::size_t>(i)] = s;
        if (!mask.at(shifted(c, d))) return false;
      }
      for (int j = i + 1; j < n; ++j)
        for (int si : {1, -1})
          for (int sj : {1, -1}) {
            std::vector<int> d(static_cast<std::size_t>(n), 0);
            d[static_cast<std::size_t>(i)] = si;
            d[static_cast<std::size_t>(j)] = sj;
            if (!mask.at(shifted(c, d))) return false;
          }
    }
    return true;
  };

  GridBuilder b(chart, h);
  std::vector<int> interior;
  for (const auto& m : members) {
    const bool in = full_stencil_inside(m);
    const int id = b.add_node(in ? NodeClass::Interior : NodeClass::Boundary, lattice_point(m, h), m);
    if (in) interior.push_back(id);
  }
  if (interior.empty()) throw DomainError("mask has no interior nodes");

  DomainSpec spec;
  spec.kind = DomainSpec::Kind::Mask;
  spec.mask = members;
  return b.finish(spec, interior, {});
}

// ---------------------------------------------------------------------------
// Fields and finite differences

GraphField make_field(GridPtr grid, Representation rep, double fill) {
  GraphField f;
  f.values = Eigen::VectorXd::Constant(grid->size(), fill);
  f.grid = std::move(grid);
  f.rep = rep;
  return f;
}

Jet jet(const Grid& grid, const Eigen::VectorXd& values, int node) {
  const auto& st = grid.stencil(node);
  const int n = grid.dim();
  Jet j;
  j.value = values(node);
  j.grad = Eigen::VectorXd::Zero(n);
  j.hess = Eigen::MatrixXd::Zero(n, n);
  // Weights sum to zero, so differences against the centre give the same jet.
  for (const auto& p : st.points) {
    if (p.node == node) continue;
    const double f = values(p.node) - j.value;
    j.grad.noalias() += f * p.wg;
    j.hess.noalias() += f * p.wh;
  }
  return j;
}

Jet jet(const GraphField& field, int node) { return jet(*field.grid, field.values, node); }

Eigen::VectorXd gradient(const GraphField& field, int node) { return jet(field, node).grad; }

double gradient_norm_sq(const GraphField& field, int node) {
  const Eigen::VectorXd g = gradient(field, node);
  return g.dot(field.grid->geometry(node).metric.sigma_inv * g);
}

Eigen::MatrixXd covariant_hessian(const Jet& j, const PointGeometry& g) {
  Eigen::MatrixXd out = j.hess;
  for (std::size_t k = 0; k < g.gamma.size(); ++k) out -= j.grad(static_cast<Eigen::Index>(k)) * g.gamma[k];
  return out;
}

Eigen::MatrixXd covariant_hessian(const GraphField& field, int node) {
  return covariant_hessian(jet(field, node), field.grid->geometry(node));
}

namespace {

Eigen::MatrixXd tilde_identity(const Jet& ut, const PointGeometry& g, const Chart& chart) {
  const double mu = g.metric.mu;
  if (chart.kind() == ChartKind::Gnomonic) return ut.hess / mu;
  const int n = chart.dim();
  const double lower = ut.value - g.y.dot(ut.grad);
  return ut.hess / mu + (2.0 * lower / (mu * mu)) * Eigen::MatrixXd::Identity(n, n);
}

void require_u(const GraphField& field) {
  if (field.rep != Representation::U)
    throw DomainError("convexity matrix requires a field in the u representation");
}

}  // namespace

Eigen::MatrixXd convexity_matrix(const GraphField& field, int node, ConvexityPath path) {
  require_u(field);
  const Grid& grid = *field.grid;
  const PointGeometry& g = grid.geometry(node);
  if (path == ConvexityPath::Direct) {
    return covariant_hessian(field, node) + field.values(node) * g.metric.sigma;
  }
  const int n = grid.dim();
  Jet ut;
  ut.value = g.metric.mu * field.values(node);
  ut.grad = Eigen::VectorXd::Zero(n);
  ut.hess = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : grid.stencil(node).points) {
    if (p.node == node) continue;
    const double f = grid.geometry(p.node).metric.mu * field.values(p.node) - ut.value;
    ut.grad.noalias() += f * p.wg;
    ut.hess.noalias() += f * p.wh;
  }
  return tilde_identity(ut, g, grid.chart());
}

Eigen::MatrixXd convexity_matrix(const Jet& u, const PointGeometry& g, const Chart& chart,
                                 ConvexityPath path) {
  if (path == ConvexityPath::Direct) return covariant_hessian(u, g) + u.value * g.metric.sigma;
  const int n = chart.dim();
  const Eigen::VectorXd& y = g.y;
  const double mu = g.metric.mu;
  Eigen::VectorXd dmu(n);
  Eigen::MatrixXd ddmu(n, n);
  if (chart.kind() == ChartKind::Gnomonic) {
    dmu = y / mu;
    ddmu = Eigen::MatrixXd::Identity(n, n) / mu - y * y.transpose() / (mu * mu * mu);
  } else {
    dmu = 2.0 * y;
    ddmu = 2.0 * Eigen::MatrixXd::Identity(n, n);
  }
  Jet ut;
  ut.value = mu * u.value;
  ut.grad = dmu * u.value + mu * u.grad;
  ut.hess = ddmu * u.value + dmu * u.grad.transpose() + u.grad * dmu.transpose() + mu * u.hess;
  return tilde_identity(ut, g, chart);
}

}  // namespace radgraph::chart
