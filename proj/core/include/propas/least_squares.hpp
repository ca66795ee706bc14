#pragma once

#include <Eigen/Dense>

namespace propas {

/// Result of a column-equilibrated least-squares solve.
struct LeastSquaresSolution {
  Eigen::VectorXd x;
  /// Ratio of extreme singular values of the column-equilibrated matrix.
  double condition = 0.0;
  Eigen::Index rank = 0;
  double residual_rms = 0.0;
};

/// Minimizes ||A x - b||_2 with a column-pivoted Householder QR.
///
/// Columns are scaled to unit Euclidean norm before factorization so that
/// regressors spanning many orders of magnitude (omega vs. P^2/omega^5) do
/// not distort the pivoting or the conditioning indicator. All-zero columns
/// keep a unit scale and surface as rank deficiency.
LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace propas
