#pragma once

#include <Eigen/Dense>

namespace radgraph {

/// Eigen-decomposition of a small symmetric matrix.
/// Eigenvalues are sorted descending; column i of `vectors` pairs with values(i).
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Closed form for n = 2, cyclic Jacobi sweeps for n >= 3 (relative off-diagonal tolerance 1e-15).
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a);

double min_eigenvalue(const Eigen::MatrixXd& a);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace radgraph
