#include "propas/least_squares.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace propas {

LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() != b.size()) {
    throw std::invalid_argument("solve_least_squares: row count mismatch");
  }
  const Eigen::Index n = A.cols();
  Eigen::VectorXd scale(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double norm = A.col(j).norm();
    scale(j) = norm > 0.0 ? norm : 1.0;
  }
  const Eigen::MatrixXd scaled = A * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  LeastSquaresSolution out;
  out.rank = qr.rank();
  out.x = qr.solve(b).cwiseQuotient(scale);

  // R shares its singular values with the scaled matrix.
  const Eigen::Index k = std::min(A.rows(), n);
  Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, n).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || k < n) {
    out.condition = std::numeric_limits<double>::infinity();
  } else {
    const double smin = sv(sv.size() - 1);
    out.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  }

  if (A.rows() > 0) {
    out.residual_rms = std::sqrt((A * out.x - b).squaredNorm() / static_cast<double>(A.rows()));
  }
  return out;
}

}  // namespace propas
