#include "propas/least_squares.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <random>

namespace propas {
namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return a;
}

TEST(SolveLeastSquares, RecoversConsistentSystem) {
  const Eigen::MatrixXd a = random_matrix(40, 5, 1);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(5, -2.0, 2.0);
  const LeastSquaresSolution s = solve_least_squares(a, a * x);
  EXPECT_EQ(s.rank, 5);
  EXPECT_LT((s.x - x).norm(), 1e-12);
  EXPECT_LT(s.residual_rms, 1e-12);
}

TEST(SolveLeastSquares, MatchesNormalEquationsOnBadlyScaledColumns) {
  Eigen::MatrixXd a = random_matrix(60, 3, 2);
  a.col(1) *= 1e-9;
  a.col(2) *= 1e6;
  const Eigen::VectorXd b = random_matrix(60, 1, 3);
  const LeastSquaresSolution s = solve_least_squares(a, b);
  // Residual orthogonal to the column space, column by column.
  const Eigen::VectorXd r = a * s.x - b;
  for (Eigen::Index j = 0; j < 3; ++j) {
    EXPECT_LT(std::abs(a.col(j).dot(r)), 1e-10 * a.col(j).norm() * b.norm());
  }
}

TEST(SolveLeastSquares, ConditionOfEquilibratedMatrix) {
  Eigen::MatrixXd a = random_matrix(30, 4, 4);
  a.col(3) *= 1e8;
  Eigen::MatrixXd eq = a;
  for (Eigen::Index j = 0; j < eq.cols(); ++j) eq.col(j) /= eq.col(j).norm();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(eq);
  const auto& sv = svd.singularValues();
  const double expected = sv(0) / sv(sv.size() - 1);
  const LeastSquaresSolution s = solve_least_squares(a, Eigen::VectorXd::Ones(30));
  EXPECT_NEAR(s.condition, expected, 1e-8 * expected);
  EXPECT_LT(s.condition, 100.0);
}

TEST(SolveLeastSquares, ZeroColumnIsRankDeficient) {
  Eigen::MatrixXd a = random_matrix(20, 3, 5);
  a.col(1).setZero();
  const LeastSquaresSolution s = solve_least_squares(a, Eigen::VectorXd::Ones(20));
  EXPECT_EQ(s.rank, 2);
  EXPECT_GT(s.condition, 1e10);
}

}  // namespace
}  // namespace propas
