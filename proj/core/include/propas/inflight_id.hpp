#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "propas/airspeed_models.hpp"

namespace propas::inflight {

/// GPS velocity and attitude for one gated sample.
struct GpsRow {
  double v_n = 0.0;    // [m/s]
  double v_e = 0.0;    // [m/s]
  double v_d = 0.0;    // [m/s]
  double psi = 0.0;    // heading [rad]
  double gamma = 0.0;  // flight path angle [rad]
};

/// Horizontal wind; the vertical component is taken as zero.
struct WindEstimate {
  double v_wn = 0.0;  // [m/s]
  double v_we = 0.0;  // [m/s]
};

using models::ModelKind;

std::size_t unknown_count(ModelKind kind);

/// Two regressor rows (north, east) and their targets.
struct RowPair {
  Eigen::MatrixXd a;  // 2 x unknowns
  Eigen::Vector2d b;
};

/// Unknowns [beta1, beta2, V_wN, V_wE].
RowPair build_rows_direct(const models::PowerSample& sample, const GpsRow& gps);

/// Unknowns [alpha0, alpha1, alpha2, V_wN, V_wE]; the (omega / 2 pi) D factor
/// is folded into the airspeed regressors. Density falls back to env.rho.
RowPair build_rows_indirect(const models::PowerSample& sample, const GpsRow& gps,
                            const models::Environment& env);

struct BatchProblem {
  ModelKind kind = ModelKind::kDirect;
  Eigen::MatrixXd a;  // 2 rows per sample
  Eigen::VectorXd b;
  std::size_t samples() const { return static_cast<std::size_t>(a.rows() / 2); }
};

/// Stacks rows for every sample. Callers pass gated samples only.
BatchProblem make_batch(ModelKind kind, std::span<const models::PowerSample> samples,
                        std::span<const GpsRow> gps, const models::Environment& env = {});

inline constexpr double kIllConditionedThreshold = 1e10;

struct BatchSolution {
  ModelKind kind = ModelKind::kDirect;
  Eigen::VectorXd theta;
  WindEstimate wind;
  double residual_rms = 0.0;
  double condition = 0.0;
  bool ill_conditioned = false;
  std::vector<std::string> warnings;

  models::DirectCoefficients direct() const;
  models::IndirectCoefficients indirect() const;
};

/// Orthogonal-factorization least squares on the stacked problem. An
/// ill-conditioned problem still returns its solution, flagged.
BatchSolution solve_batch(const BatchProblem& problem);

/// Exponentially forgetting RLS. The estimate is carried in a scaled
/// parameterization, theta = scale .* theta_scaled, so that a single prior
/// variance suits unknowns of very different magnitude.
struct RlsState {
  Eigen::VectorXd theta_scaled;
  Eigen::VectorXd scale;
  Eigen::MatrixXd p_cov;  // covariance of theta_scaled
  double lambda_f = 1.0;
  double p_cap = 0.0;  // trace bound against covariance windup

  Eigen::VectorXd theta() const { return scale.cwiseProduct(theta_scaled); }
};

struct RlsOptions {
  double lambda_f = 1.0;
  double p0 = 1e8;
  /// Parameter scales; empty means unit scales.
  Eigen::VectorXd scale;
  /// Initial estimate in physical units; empty means zero.
  Eigen::VectorXd theta0;
};

RlsState make_rls(std::size_t unknowns, const RlsOptions& options = {});

/// Scales that equilibrate the columns of a batch problem, usable as
/// RlsOptions::scale so that P0 applies uniformly.
Eigen::VectorXd parameter_scales(const BatchProblem& problem);

/// One scalar-row update per row of `rows`.
void rls_update(RlsState& state, const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets);

inline void rls_update(RlsState& state, const RowPair& pair) { rls_update(state, pair.a, pair.b); }

/// Processes every row of a batch problem once.
void rls_run(RlsState& state, const BatchProblem& problem);

}  // namespace propas::inflight
