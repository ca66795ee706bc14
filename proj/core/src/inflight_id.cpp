#include "propas/inflight_id.hpp"

#include <cmath>
#include <stdexcept>

#include "propas/errors.hpp"
#include "propas/least_squares.hpp"
#include "propas/units.hpp"

namespace propas::inflight {

namespace {

void check_inputs(const models::PowerSample& s, const GpsRow& g) {
  if (!(s.omega > 0.0)) throw std::invalid_argument("build_rows: omega must be positive");
  if (!std::isfinite(s.power) || !std::isfinite(g.v_n) || !std::isfinite(g.v_e) ||
      !std::isfinite(g.psi) || !std::isfinite(g.gamma)) {
    throw NonFiniteError("build_rows: non-finite sample");
  }
}

RowPair project(const Eigen::RowVectorXd& airspeed_regressors, const GpsRow& g) {
  const auto k = airspeed_regressors.size();
  RowPair out{Eigen::MatrixXd::Zero(2, k + 2), Eigen::Vector2d(g.v_n, g.v_e)};
  const double cg = std::cos(g.gamma);
  out.a.row(0).head(k) = airspeed_regressors * (cg * std::cos(g.psi));
  out.a.row(1).head(k) = airspeed_regressors * (cg * std::sin(g.psi));
  out.a(0, k) = 1.0;
  out.a(1, k + 1) = 1.0;
  return out;
}

}  // namespace

std::size_t unknown_count(ModelKind kind) { return kind == ModelKind::kDirect ? 4 : 5; }

RowPair build_rows_direct(const models::PowerSample& s, const GpsRow& g) {
  check_inputs(s, g);
  Eigen::RowVectorXd reg(2);
  reg << s.omega, s.power * s.power / std::pow(s.omega, 5);
  return project(reg, g);
}

RowPair build_rows_indirect(const models::PowerSample& s, const GpsRow& g,
                            const models::Environment& env) {
  check_inputs(s, g);
  const double rho = s.rho.value_or(env.rho);
  const double cp = models::power_coefficient(s.power, s.omega, rho, env.diameter);
  const double nd = units::rad_s_to_rev_s(s.omega) * env.diameter;
  Eigen::RowVectorXd reg(3);
  reg << nd, nd * cp, nd * std::pow(cp, 4);
  return project(reg, g);
}

BatchProblem make_batch(ModelKind kind, std::span<const models::PowerSample> samples,
                        std::span<const GpsRow> gps, const models::Environment& env) {
  if (samples.size() != gps.size()) throw std::invalid_argument("make_batch: length mismatch");
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto m = static_cast<Eigen::Index>(unknown_count(kind));
  BatchProblem p{kind, Eigen::MatrixXd(2 * n, m), Eigen::VectorXd(2 * n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const RowPair rows = kind == ModelKind::kDirect
                             ? build_rows_direct(samples[idx], gps[idx])
                             : build_rows_indirect(samples[idx], gps[idx], env);
    p.a.middleRows(2 * i, 2) = rows.a;
    p.b.segment(2 * i, 2) = rows.b;
  }
  return p;
}

models::DirectCoefficients BatchSolution::direct() const {
  if (kind != ModelKind::kDirect) throw std::logic_error("BatchSolution: not a direct model");
  return {theta(0), theta(1)};
}

models::IndirectCoefficients BatchSolution::indirect() const {
  if (kind != ModelKind::kIndirect) throw std::logic_error("BatchSolution: not an indirect model");
  return {theta(0), theta(1), theta(2)};
}

BatchSolution solve_batch(const BatchProblem& problem) {
  const auto m = static_cast<Eigen::Index>(unknown_count(problem.kind));
  if (problem.a.cols() != m) throw std::invalid_argument("solve_batch: column count mismatch");
  if (problem.a.rows() < m) {
    throw RankDeficientError("solve_batch: " + std::to_string(problem.a.rows()) + " rows for " +
                             std::to_string(m) + " unknowns");
  }
  if (!problem.a.allFinite() || !problem.b.allFinite()) {
    throw NonFiniteError("solve_batch: non-finite regressors or targets");
  }

  const LeastSquaresSolution ls = solve_least_squares(problem.a, problem.b);
  BatchSolution out;
  out.kind = problem.kind;
  out.theta = ls.x;
  out.wind = {ls.x(m - 2), ls.x(m - 1)};
  out.residual_rms = ls.residual_rms;
  out.condition = ls.condition;
  out.ill_conditioned = !(ls.condition <= kIllConditionedThreshold);
  if (out.ill_conditioned) {
    out.warnings.push_back("ill-conditioned identification (condition " +
                           std::to_string(ls.condition) +
                           "); wind and airspeed are not separable, vary the heading");
  }
  return out;
}

RlsState make_rls(std::size_t unknowns, const RlsOptions& options) {
  const auto n = static_cast<Eigen::Index>(unknowns);
  if (!(options.lambda_f > 0.0 && options.lambda_f <= 1.0)) {
    throw std::invalid_argument("make_rls: lambda_f must be in (0, 1]");
  }
  if (!(options.p0 > 0.0)) throw std::invalid_argument("make_rls: p0 must be positive");

  RlsState s;
  s.scale = options.scale.size() == 0 ? Eigen::VectorXd::Ones(n) : options.scale;
  if (s.scale.size() != n || !(s.scale.array() > 0.0).all()) {
    throw std::invalid_argument("make_rls: scale must hold one positive entry per unknown");
  }
  if (options.theta0.size() == 0) {
    s.theta_scaled = Eigen::VectorXd::Zero(n);
  } else if (options.theta0.size() == n) {
    s.theta_scaled = options.theta0.cwiseQuotient(s.scale);
  } else {
    throw std::invalid_argument("make_rls: theta0 size mismatch");
  }
  s.p_cov = options.p0 * Eigen::MatrixXd::Identity(n, n);
  s.lambda_f = options.lambda_f;
  s.p_cap = options.p0 * static_cast<double>(n);
  return s;
}

Eigen::VectorXd parameter_scales(const BatchProblem& problem) {
  Eigen::VectorXd scale(problem.a.cols());
  const double rows = static_cast<double>(std::max<Eigen::Index>(problem.a.rows(), 1));
  for (Eigen::Index j = 0; j < problem.a.cols(); ++j) {
    const double rms = problem.a.col(j).norm() / std::sqrt(rows);
    scale(j) = rms > 0.0 ? 1.0 / rms : 1.0;
  }
  return scale;
}

void rls_update(RlsState& s, const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets) {
  if (rows.cols() != s.theta_scaled.size() || rows.rows() != targets.size()) {
    throw std::invalid_argument("rls_update: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::VectorXd phi = rows.row(i).transpose().cwiseProduct(s.scale);
    const Eigen::VectorXd p_phi = s.p_cov * phi;
    const double denom = s.lambda_f + phi.dot(p_phi);
    const Eigen::VectorXd gain = p_phi / denom;
    const double err = targets(i) - phi.dot(s.theta_scaled);
    s.theta_scaled += gain * err;
    s.p_cov = (s.p_cov - gain * p_phi.transpose()) / s.lambda_f;
    s.p_cov = 0.5 * (s.p_cov + s.p_cov.transpose());
    const double trace = s.p_cov.trace();
    if (trace > s.p_cap) s.p_cov *= s.p_cap / trace;
  }
}

void rls_run(RlsState& state, const BatchProblem& problem) {
  rls_update(state, problem.a, problem.b);
}

}  // namespace propas::inflight
