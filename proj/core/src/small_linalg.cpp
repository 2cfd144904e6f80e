#include "radgraph/small_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace radgraph {

namespace {

SymmetricEigen eigen2(const Eigen::MatrixXd& a) {
  const double p = a(0, 0);
  const double q = a(1, 1);
  const double r = 0.5 * (a(0, 1) + a(1, 0));
  const double mean = 0.5 * (p + q);
  const double half = 0.5 * (p - q);
  const double rad = std::hypot(half, r);
  SymmetricEigen e;
  e.values.resize(2);
  e.values << mean + rad, mean - rad;
  e.vectors.resize(2, 2);
  if (rad == 0.0) {
    e.vectors.setIdentity();
    return e;
  }
  // Rotation angle of the leading eigenvector.
  const double theta = 0.5 * std::atan2(2.0 * r, p - q);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  e.vectors << c, -s, s, c;
  return e;
}

SymmetricEigen jacobi(const Eigen::MatrixXd& a_in) {
  const Eigen::Index n = a_in.rows();
  Eigen::MatrixXd a = 0.5 * (a_in + a_in.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off = std::max(off, std::abs(a(i, j)));
    if (off <= 1e-15 * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
  SymmetricEigen e;
  e.values.resize(n);
  e.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    e.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    e.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return e;
}

}  // namespace

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a) {
  if (a.rows() == 1) {
    SymmetricEigen e;
    e.values = Eigen::VectorXd::Constant(1, a(0, 0));
    e.vectors = Eigen::MatrixXd::Identity(1, 1);
    return e;
  }
  if (a.rows() == 2) return eigen2(a);
  return jacobi(a);
}

double min_eigenvalue(const Eigen::MatrixXd& a) {
  const auto e = symmetric_eigen(a);
  return e.values(e.values.size() - 1);
}

}  // namespace radgraph
