#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace propas::sparse {

/// One training observation. Fields a library does not use may stay zero.
struct RegressionRecord {
  double power = 0.0;      // [W]
  double omega = 0.0;      // [rad/s]
  double omega_dot = 0.0;  // [rad/s^2]
  double c_p = 0.0;
  double v_a = 0.0;  // target airspeed [m/s]
};

enum class TargetTransform {
  kIdentity,      // y = V_a
  kAdvanceRatio,  // y = V_a / ((omega / 2 pi) D)
};

struct Feature {
  std::string name;
  std::function<double(const RegressionRecord&)> eval;
  /// Constant features are represented by the unpenalized intercept.
  bool constant = false;
};

struct FeatureLibrary {
  std::vector<Feature> features;
  TargetTransform transform = TargetTransform::kIdentity;
  double diameter = 0.0;  // used by kAdvanceRatio

  double target(const RegressionRecord& r) const;
  bool has_constant() const;
  std::vector<std::string> names() const;
  std::size_t size() const { return features.size(); }
};

struct DirectLibraryOptions {
  int max_power_exponent = 2;
  int min_omega_exponent = -5;
  int max_omega_exponent = 2;
  bool include_omega_dot = true;
};

/// Monomials P^a omega^b (constant excluded) plus omega_dot and
/// omega_dot/omega. Throws std::invalid_argument on omega <= 0.
FeatureLibrary build_features_direct(std::span<const RegressionRecord> records,
                                     const DirectLibraryOptions& options = {});

/// C_P^k for k = 0..max_degree against the advance-ratio target.
FeatureLibrary build_features_indirect(std::span<const RegressionRecord> records, double diameter,
                                       int max_degree = 6);

/// Name of the monomial P^a omega^b, e.g. "omega", "P2_over_omega5".
std::string monomial_name(int power_exponent, int omega_exponent);

struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Design assemble(const FeatureLibrary& library, std::span<const RegressionRecord> records);

/// Column standardization (zero mean, unit population variance) with
/// zero-variance columns removed.
struct Standardization {
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::Index> dropped;
  Eigen::VectorXd mean;   // per kept column
  Eigen::VectorXd scale;  // per kept column
  double y_mean = 0.0;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

Standardization fit_standardization(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Coefficients for the raw (kept) columns and intercept equivalent to a
/// standardized-space coefficient vector.
struct LinearModel {
  Eigen::VectorXd coefficients;  // aligned with Standardization::kept
  double intercept = 0.0;
};

LinearModel unstandardize(const Standardization& s, const Eigen::VectorXd& w_standardized);

struct LassoOptions {
  double tolerance = 1e-10;  // max coefficient change per sweep
  int max_sweeps = 100000;
  bool record_objective = false;
};

struct LassoResult {
  Eigen::VectorXd w;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> objective;  // per sweep, when recorded
};

/// Cyclic coordinate descent with soft-thresholding on
/// (1/2N) ||y - X w||^2 + lambda ||w||_1. Columns are expected standardized
/// and y centered. Throws NonFiniteError on non-finite input.
LassoResult lasso_coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     double lambda, const LassoOptions& options = {});
LassoResult lasso_coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     double lambda, const Eigen::VectorXd& warm_start,
                                     const LassoOptions& options = {});

/// Smallest lambda for which every coefficient is zero.
double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// `count` log-spaced values from lambda_max down to ratio * lambda_max.
std::vector<double> lambda_grid(double lambda_max, int count = 100, double ratio = 1e-4);

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 20240917;
  int n_lambdas = 100;
  double lambda_ratio = 1e-4;
  LassoOptions lasso;
};

struct LassoPath {
  std::vector<double> lambdas;
  Eigen::MatrixXd coefs;  // kept feature x lambda, standardized space, full data
  std::vector<double> cv_mean;
  std::vector<double> cv_se;
  Standardization standardization;
  int folds = 0;
};

/// Deterministic fold index (0..k-1) per sample from a seeded shuffle.
std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed);

/// Warm-started pathwise LASSO with k-fold cross-validation. An empty
/// `lambdas` selects the default log grid.
LassoPath cv_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const CvOptions& options = {}, std::span<const double> lambdas = {});

struct SelectedModel {
  std::vector<std::string> support;
  std::vector<Eigen::Index> support_columns;  // raw design columns, constant excluded
  Eigen::VectorXd coefficients;               // aligned with support_columns
  double intercept = 0.0;
  bool has_intercept = false;
  double lambda_selected = 0.0;
  std::size_t lambda_index = 0;
  double cv_error = 0.0;
  double fit_rmse = 0.0;
  std::vector<std::string> warnings;

  double predict(const Eigen::RowVectorXd& x_row) const;
};

/// One-standard-error rule: among lambdas whose CV error is within one
/// standard error of the minimum, take the sparsest support (largest lambda
/// on ties), then refit it by unpenalized least squares.
SelectedModel select_lambda(const LassoPath& path, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& y, const FeatureLibrary& library);

struct Discovery {
  LassoPath path;
  SelectedModel model;
};

Discovery discover(const FeatureLibrary& library, std::span<const RegressionRecord> records,
                   const CvOptions& options = {});

}  // namespace propas::sparse
