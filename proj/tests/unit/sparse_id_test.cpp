#include "propas/sparse_id.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "propas/errors.hpp"

namespace propas::sparse {
namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return a;
}

// Standardized design and centered target.
struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Problem standardized(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Standardization s = fit_standardization(x, y);
  return {s.apply(x), y.array() - s.y_mean};
}

Problem random_problem(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  const Eigen::MatrixXd x = gaussian(n, p, seed);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta(0) = 1.5;
  beta(3) = -0.7;
  beta(p - 1) = 0.2;
  const Eigen::VectorXd y = x * beta + 0.3 * gaussian(n, 1, seed + 1);
  return standardized(x, y);
}

std::vector<RegressionRecord> direct_records() {
  std::vector<RegressionRecord> out;
  for (int i = 0; i < 20; ++i)
    out.push_back({50.0 + 10.0 * i, 400.0 + 20.0 * i, 0.5 * i, 0.0, 0.0});
  return out;
}

TEST(BuildFeaturesDirect, CountsAndNames) {
  const auto records = direct_records();
  const FeatureLibrary lib = build_features_direct(records);
  EXPECT_EQ(lib.size(), 25u);
  const auto names = lib.names();
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
  for (const char* want : {"omega", "P2_over_omega5", "omega_dot", "omega_dot_over_omega"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  }
  EXPECT_FALSE(lib.has_constant());

  const RegressionRecord& r = records[3];
  for (const auto& f : lib.features) {
    if (f.name == "P2_over_omega5")
      EXPECT_DOUBLE_EQ(f.eval(r), r.power * r.power / std::pow(r.omega, 5));
    if (f.name == "omega") EXPECT_EQ(f.eval(r), r.omega);
    if (f.name == "omega_dot_over_omega") EXPECT_DOUBLE_EQ(f.eval(r), r.omega_dot / r.omega);
  }
  EXPECT_EQ(build_features_direct(records, {2, -5, 2, false}).size(), 23u);
}

TEST(BuildFeaturesDirect, RejectsNonPositiveOmega) {
  auto records = direct_records();
  records[5].omega = 0.0;
  EXPECT_THROW(build_features_direct(records), std::invalid_argument);
  EXPECT_THROW(build_features_direct({}), std::invalid_argument);
}

TEST(BuildFeaturesIndirect, PolynomialInPowerCoefficient) {
  std::vector<RegressionRecord> records{{0.0, 600.0, 0.0, 0.04, 12.0}};
  const FeatureLibrary lib = build_features_indirect(records, 0.2286);
  ASSERT_EQ(lib.size(), 7u);
  EXPECT_EQ(lib.names()[0], "cp0");
  EXPECT_EQ(lib.names()[1], "cp1");
  EXPECT_EQ(lib.names()[4], "cp4");
  EXPECT_TRUE(lib.features[0].constant);
  EXPECT_DOUBLE_EQ(lib.features[4].eval(records[0]), std::pow(0.04, 4));

  // The target is V_a / (n D); doubling omega and V_a together leaves it unchanged.
  const double y = lib.target(records[0]);
  EXPECT_NEAR(y, 12.0 / (600.0 / (2.0 * std::numbers::pi) * 0.2286), 1e-14);
  RegressionRecord doubled = records[0];
  doubled.omega *= 2.0;
  doubled.v_a *= 2.0;
  EXPECT_NEAR(lib.target(doubled), y, 1e-14);
}

TEST(MonomialName, Conventions) {
  EXPECT_EQ(monomial_name(0, 1), "omega");
  EXPECT_EQ(monomial_name(2, -5), "P2_over_omega5");
}

TEST(LassoCoordinateDescent, LargeLambdaGivesZero) {
  const Problem p = random_problem(200, 25, 11);
  const double lmax = lambda_max(p.x, p.y);
  EXPECT_TRUE(lasso_coordinate_descent(p.x, p.y, lmax).w.isZero(0.0));
  EXPECT_TRUE(lasso_coordinate_descent(p.x, p.y, 3.0 * lmax).w.isZero(0.0));
  EXPECT_FALSE(lasso_coordinate_descent(p.x, p.y, 0.9 * lmax).w.isZero(0.0));
}

TEST(LassoCoordinateDescent, ZeroLambdaMatchesNormalEquations) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Problem p = random_problem(200, 25, seed);
    const Eigen::VectorXd ols = (p.x.transpose() * p.x).ldlt().solve(p.x.transpose() * p.y);
    const Eigen::VectorXd w = lasso_coordinate_descent(p.x, p.y, 0.0).w;
    EXPECT_LE((w - ols).norm(), 1e-8 * ols.norm()) << "seed " << seed;
  }
}

TEST(LassoCoordinateDescent, RecoversSparseSupport) {
  const Eigen::MatrixXd x = gaussian(300, 25, 21);
  const Eigen::VectorXd y = 3.0 * x.col(1) - 2.0 * x.col(5) + 1e-6 * gaussian(300, 1, 22);
  const Problem p = standardized(x, y);
  const LassoPath path = cv_lasso(x, y, {.folds = 5});
  bool found = false;
  for (Eigen::Index l = 0; l < path.coefs.cols(); ++l) {
    const auto col = path.coefs.col(l);
    std::vector<Eigen::Index> nz;
    for (Eigen::Index j = 0; j < col.size(); ++j) {
      if (col(j) != 0.0) nz.push_back(j);
    }
    if (nz == std::vector<Eigen::Index>{1, 5}) found = true;
  }
  EXPECT_TRUE(found);
  const Eigen::VectorXd w = lasso_coordinate_descent(p.x, p.y, 1e-3 * lambda_max(p.x, p.y)).w;
  const Standardization s = fit_standardization(x, y);
  const LinearModel m = unstandardize(s, w);
  EXPECT_NEAR(m.coefficients(1), 3.0, 1e-2);
  EXPECT_NEAR(m.coefficients(5), -2.0, 1e-2);
}

TEST(LassoCoordinateDescent, ObjectiveNeverIncreases) {
  const Problem p = random_problem(120, 25, 31);
  LassoOptions opts;
  opts.record_objective = true;
  const LassoResult r = lasso_coordinate_descent(p.x, p.y, 0.02, opts);
  ASSERT_TRUE(r.converged);
  ASSERT_GE(r.objective.size(), 2u);
  for (std::size_t i = 1; i < r.objective.size(); ++i) {
    EXPECT_LE(r.objective[i], r.objective[i - 1] + 1e-15 * std::abs(r.objective[i - 1]));
  }
}

TEST(LassoCoordinateDescent, KktHoldsAlongPath) {
  const Problem p = random_problem(200, 25, 41);
  const double n = static_cast<double>(p.x.rows());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p.x.cols());
  for (double lambda : lambda_grid(lambda_max(p.x, p.y))) {
    w = lasso_coordinate_descent(p.x, p.y, lambda, w).w;
    const Eigen::VectorXd g = p.x.transpose() * (p.y - p.x * w) / n;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      if (w(j) == 0.0) {
        EXPECT_LE(std::abs(g(j)), lambda + 1e-8);
      } else {
        EXPECT_NEAR(g(j), lambda * (w(j) > 0.0 ? 1.0 : -1.0), 1e-8);
      }
    }
  }
}

TEST(LassoCoordinateDescent, PathIsContinuous) {
  const Problem p = random_problem(200, 25, 51);
  const auto grid = lambda_grid(lambda_max(p.x, p.y), 400);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(p.x.cols());
  double biggest = 0.0;
  for (double lambda : grid) {
    const Eigen::VectorXd w = lasso_coordinate_descent(p.x, p.y, lambda, prev).w;
    biggest = std::max(biggest, (w - prev).lpNorm<Eigen::Infinity>());
    prev = w;
  }
  // On a 400-point grid no single step moves a coefficient far.
  EXPECT_LT(biggest, 0.05);
}

TEST(LassoCoordinateDescent, RejectsBadInput) {
  Problem p = random_problem(50, 5, 61);
  EXPECT_THROW(lasso_coordinate_descent(p.x, p.y, -1.0), std::invalid_argument);
  p.x(3, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(lasso_coordinate_descent(p.x, p.y, 0.1), NonFiniteError);
  p = random_problem(50, 5, 61);
  p.y(0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(cv_lasso(p.x, p.y), NonFiniteError);
}

TEST(Standardization, RoundTripPredictions) {
  Eigen::MatrixXd x = gaussian(80, 6, 71);
  x.col(2) = x.col(2) * 1e4 + Eigen::VectorXd::Constant(80, 3e5);
  const Eigen::VectorXd y = gaussian(80, 1, 72);
  const Standardization s = fit_standardization(x, y);
  const Eigen::VectorXd w = gaussian(6, 1, 73);
  const LinearModel m = unstandardize(s, w);
  const Eigen::VectorXd standardized_pred = (s.apply(x) * w).array() + s.y_mean;
  const Eigen::VectorXd raw_pred = (x * m.coefficients).array() + m.intercept;
  EXPECT_LT((standardized_pred - raw_pred).lpNorm<Eigen::Infinity>(), 1e-10);

  const Eigen::MatrixXd xs = s.apply(x);
  for (Eigen::Index j = 0; j < xs.cols(); ++j) {
    EXPECT_NEAR(xs.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR(xs.col(j).squaredNorm() / 80.0, 1.0, 1e-12);
  }
}

TEST(Standardization, DropsConstantColumns) {
  Eigen::MatrixXd x = gaussian(30, 4, 81);
  x.col(1).setConstant(2.5);
  const Standardization s = fit_standardization(x, Eigen::VectorXd::Ones(30));
  EXPECT_EQ(s.dropped, std::vector<Eigen::Index>{1});
  EXPECT_EQ(s.kept, (std::vector<Eigen::Index>{0, 2, 3}));
}

TEST(FoldAssignment, DeterministicAndBalanced) {
  const auto a = fold_assignment(103, 10, 5);
  EXPECT_EQ(a, fold_assignment(103, 10, 5));
  EXPECT_NE(a, fold_assignment(103, 10, 6));
  std::vector<int> counts(10, 0);
  for (int f : a) ++counts[static_cast<std::size_t>(f)];
  for (int c : counts) {
    EXPECT_GE(c, 10);
    EXPECT_LE(c, 11);
  }
  const auto loo = fold_assignment(12, 12, 1);
  EXPECT_EQ(std::set<int>(loo.begin(), loo.end()).size(), 12u);
  EXPECT_THROW(fold_assignment(5, 6, 1), std::invalid_argument);
  EXPECT_THROW(fold_assignment(5, 1, 1), std::invalid_argument);
}

TEST(CvLasso, LeaveOneOutAndDeterminism) {
  const Eigen::MatrixXd x = gaussian(30, 4, 91);
  const Eigen::VectorXd y = x.col(0) + 0.1 * gaussian(30, 1, 92);
  const LassoPath loo = cv_lasso(x, y, {.folds = 30, .n_lambdas = 20});
  EXPECT_EQ(loo.folds, 30);
  EXPECT_EQ(loo.cv_mean.size(), 20u);
  const LassoPath again = cv_lasso(x, y, {.folds = 30, .n_lambdas = 20});
  EXPECT_EQ(loo.cv_mean, again.cv_mean);
  EXPECT_TRUE(loo.coefs == again.coefs);
  EXPECT_THROW(cv_lasso(x, y, {.folds = 31}), std::invalid_argument);
}

TEST(CvLasso, PathStartsEmptyAndDecreases) {
  const Eigen::MatrixXd x = gaussian(100, 8, 93);
  const Eigen::VectorXd y = x.col(2) - x.col(6) + 0.1 * gaussian(100, 1, 94);
  const LassoPath path = cv_lasso(x, y, {.folds = 5});
  EXPECT_TRUE(path.coefs.col(0).isZero(0.0));
  for (std::size_t l = 1; l < path.lambdas.size(); ++l)
    EXPECT_LT(path.lambdas[l], path.lambdas[l - 1]);
  const std::vector<double> increasing{0.1, 0.2};
  EXPECT_THROW(cv_lasso(x, y, {.folds = 5}, increasing), std::invalid_argument);
}

TEST(CvLasso, EmptyModelErrorIsHeldOutVariance) {
  const Eigen::MatrixXd x = gaussian(57, 5, 95);
  const Eigen::VectorXd y = x.col(0) + gaussian(57, 1, 96);
  const CvOptions opts{.folds = 6, .seed = 3};
  const std::vector<double> huge{1e6};
  const LassoPath path = cv_lasso(x, y, opts, huge);

  // Every fold predicts its training mean.
  const auto folds = fold_assignment(57, 6, 3);
  std::vector<double> errs;
  for (int f = 0; f < 6; ++f) {
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < 57; ++i) {
      if (folds[static_cast<std::size_t>(i)] != f) {
        sum += y(i);
        ++count;
      }
    }
    const double mean = sum / count;
    double se = 0.0;
    int held = 0;
    for (int i = 0; i < 57; ++i) {
      if (folds[static_cast<std::size_t>(i)] == f) {
        se += (y(i) - mean) * (y(i) - mean);
        ++held;
      }
    }
    errs.push_back(se / held);
  }
  double mean_err = 0.0;
  for (double e : errs) mean_err += e / 6.0;
  EXPECT_NEAR(path.cv_mean[0], mean_err, 1e-12 * mean_err);
  double var = 0.0;
  for (double e : errs) var += (e - mean_err) * (e - mean_err) / 5.0;
  EXPECT_NEAR(path.cv_se[0], std::sqrt(var / 6.0), 1e-10);

  const double y_var = (y.array() - y.mean()).square().mean();
  EXPECT_NEAR(path.cv_mean[0], y_var, 0.2 * y_var);
}

FeatureLibrary two_feature_library() {
  FeatureLibrary lib;
  lib.features.push_back({"a", [](const RegressionRecord& r) { return r.power; }, false});
  lib.features.push_back({"b", [](const RegressionRecord& r) { return r.omega; }, false});
  return lib;
}

TEST(SelectLambda, SparsestWithinOneStandardError) {
  const Eigen::MatrixXd x = gaussian(40, 2, 101);
  const Eigen::VectorXd y = 2.0 * x.col(0) + 0.5 * x.col(1);
  LassoPath path;
  path.lambdas = {4.0, 3.0, 2.0, 1.0};
  path.coefs.resize(2, 4);
  path.coefs << 0.0, 0.5, 1.0, 1.5,  //
      0.0, 0.0, 0.0, 0.2;
  path.cv_mean = {10.0, 2.0, 1.2, 1.0};
  path.cv_se = {0.1, 0.1, 0.1, 0.3};
  path.standardization = fit_standardization(x, y);

  const SelectedModel m = select_lambda(path, x, y, two_feature_library());
  EXPECT_EQ(m.lambda_index, 2u);
  EXPECT_EQ(m.lambda_selected, 2.0);
  EXPECT_EQ(m.support, std::vector<std::string>{"a"});
  EXPECT_FALSE(m.has_intercept);
  // Debiased: unpenalized least squares on column a alone.
  const double ls = x.col(0).dot(y) / x.col(0).squaredNorm();
  EXPECT_NEAR(m.coefficients(0), ls, 1e-12);
  EXPECT_NEAR(m.predict(x.row(0)), ls * x(0, 0), 1e-12);

  // A tighter band excludes the sparse point.
  path.cv_se[3] = 0.1;
  EXPECT_EQ(select_lambda(path, x, y, two_feature_library()).lambda_index, 3u);
}

TEST(SelectLambda, TiesGoToLargestLambda) {
  const Eigen::MatrixXd x = gaussian(40, 2, 102);
  const Eigen::VectorXd y = x.col(0);
  LassoPath path;
  path.lambdas = {3.0, 2.0, 1.0};
  path.coefs.resize(2, 3);
  path.coefs << 0.2, 0.6, 0.9,  //
      0.0, 0.0, 0.0;
  path.cv_mean = {1.0, 0.9, 0.8};
  path.cv_se = {0.5, 0.5, 0.5};
  path.standardization = fit_standardization(x, y);
  EXPECT_EQ(select_lambda(path, x, y, two_feature_library()).lambda_index, 0u);
}

TEST(SelectLambda, IndirectSupportListsInterceptFirst) {
  std::vector<RegressionRecord> records;
  for (int i = 0; i < 60; ++i) {
    const double cp = 0.01 + 0.0005 * i;
    const double omega = 500.0 + 3.0 * i;
    const double n_d = omega / (2.0 * std::numbers::pi) * 0.2286;
    records.push_back({0.0, omega, 0.0, cp, n_d * (0.9 - 4.0 * cp)});
  }
  const FeatureLibrary lib = build_features_indirect(records, 0.2286);
  const Discovery d = discover(lib, records, {.folds = 5});
  ASSERT_FALSE(d.model.support.empty());
  EXPECT_EQ(d.model.support.front(), "cp0");
  EXPECT_TRUE(d.model.has_intercept);
  EXPECT_NEAR(d.model.intercept, 0.9, 1e-6);
}

TEST(SelectLambda, RejectsEmptyPath) {
  EXPECT_THROW(
      select_lambda(LassoPath{}, Eigen::MatrixXd(), Eigen::VectorXd(), two_feature_library()),
      std::invalid_argument);
}

}  // namespace
}  // namespace propas::sparse
