#include "propas/inflight_id.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "propas/errors.hpp"

namespace propas::inflight {
namespace {

constexpr double kPi = std::numbers::pi;
const models::DirectCoefficients kBeta{2.55e-2, -6.85e11};
const models::IndirectCoefficients kAlpha{0.869, -3.60, -8.18e3};

struct Flight {
  std::vector<models::PowerSample> samples;
  std::vector<GpsRow> gps;
};

struct WindSchedule {
  WindEstimate before{3.0, -2.0};
  WindEstimate after{3.0, -2.0};
  int step_at = -1;
};

// Level flight following the direct model exactly, heading turning at a
// constant rate, airspeed and rotor loading varied independently.
Flight direct_flight(int n, const WindSchedule& wind, double turn_samples = 600.0,
                     double noise = 0.0, bool steady = false) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, noise > 0.0 ? noise : 1.0);
  Flight f;
  for (int i = 0; i < n; ++i) {
    const double t = steady ? 0.0 : static_cast<double>(i);
    const double v_a = 18.0 + 4.0 * std::sin(2.0 * kPi * t / 470.0);
    const double margin = 4.0 + 1.5 * std::sin(2.0 * kPi * t / 230.0);
    const double omega = (v_a + margin) / kBeta.beta1;
    const double power = std::sqrt(margin * std::pow(omega, 5) / -kBeta.beta2);
    const double psi = turn_samples > 0.0 ? 2.0 * kPi * i / turn_samples : 0.7;
    const WindEstimate w = (wind.step_at >= 0 && i >= wind.step_at) ? wind.after : wind.before;
    GpsRow row{v_a * std::cos(psi) + w.v_wn, v_a * std::sin(psi) + w.v_we, 0.0, psi, 0.0};
    if (noise > 0.0) {
      row.v_n += g(rng);
      row.v_e += g(rng);
    }
    f.samples.push_back({power, omega});
    f.gps.push_back(row);
  }
  return f;
}

Flight indirect_flight(int n, const models::Environment& env) {
  Flight f;
  for (int i = 0; i < n; ++i) {
    const double cp = 0.02 + 0.015 * std::sin(2.0 * kPi * i / 230.0);
    const double omega = 700.0 + 150.0 * std::sin(2.0 * kPi * i / 470.0);
    const double nrev = omega / (2.0 * kPi);
    const double v_a = nrev * env.diameter *
                       (kAlpha.alpha0 + kAlpha.alpha1 * cp + kAlpha.alpha2 * std::pow(cp, 4));
    const double power = cp * env.rho * nrev * nrev * nrev * std::pow(env.diameter, 5);
    const double psi = 2.0 * kPi * i / 600.0;
    const double gamma = 0.05 * std::sin(2.0 * kPi * i / 90.0);
    f.samples.push_back({power, omega});
    f.gps.push_back({v_a * std::cos(gamma) * std::cos(psi) - 1.0,
                     v_a * std::cos(gamma) * std::sin(psi) + 2.5, 0.0, psi, gamma});
  }
  return f;
}

double relative_error(double got, double want) { return std::abs(got - want) / std::abs(want); }

TEST(BuildRowsDirect, ZeroHeading) {
  const models::PowerSample s{150.0, 800.0};
  const RowPair r = build_rows_direct(s, {20.0, 1.0, 0.0, 0.0, 0.0});
  const double q = 150.0 * 150.0 / std::pow(800.0, 5);
  Eigen::MatrixXd want(2, 4);
  want << 800.0, q, 1.0, 0.0,  //
      0.0, 0.0, 0.0, 1.0;
  EXPECT_TRUE(r.a.isApprox(want, 1e-15));
  EXPECT_EQ(r.b, Eigen::Vector2d(20.0, 1.0));
}

TEST(BuildRowsDirect, EastHeadingMovesRegressors) {
  const RowPair r = build_rows_direct({150.0, 800.0}, {1.0, 20.0, 0.0, kPi / 2.0, 0.0});
  EXPECT_NEAR(r.a(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(r.a(0, 1), 0.0, 1e-25);
  EXPECT_NEAR(r.a(1, 0), 800.0, 1e-12);
  EXPECT_EQ(r.a(0, 2), 1.0);
  EXPECT_EQ(r.a(1, 3), 1.0);
}

TEST(BuildRowsDirect, RejectsInvalidSamples) {
  EXPECT_THROW(build_rows_direct({100.0, 0.0}, {}), std::invalid_argument);
  GpsRow bad;
  bad.v_n = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(build_rows_direct({100.0, 500.0}, bad), NonFiniteError);
}

TEST(BuildRowsIndirect, ZeroAndEastHeading) {
  const models::Environment env;
  const models::PowerSample s{150.0, 800.0};
  const double cp = models::power_coefficient(150.0, 800.0, env.rho, env.diameter);
  const double nd = 800.0 / (2.0 * kPi) * env.diameter;
  const RowPair north = build_rows_indirect(s, {10.0, 0.0, 0.0, 0.0, 0.0}, env);
  ASSERT_EQ(north.a.cols(), 5);
  EXPECT_NEAR(north.a(0, 0), nd, 1e-12);
  EXPECT_NEAR(north.a(0, 1), nd * cp, 1e-14);
  EXPECT_NEAR(north.a(0, 2), nd * std::pow(cp, 4), 1e-18);
  EXPECT_EQ(north.a(0, 3), 1.0);
  EXPECT_TRUE(north.a.row(1).head(4).isZero(0.0));
  EXPECT_EQ(north.a(1, 4), 1.0);

  const RowPair east = build_rows_indirect(s, {0.0, 10.0, 0.0, kPi / 2.0, 0.0}, env);
  EXPECT_NEAR(east.a(1, 0), nd, 1e-12);
  EXPECT_NEAR(east.a(0, 0), 0.0, 1e-12);
}

TEST(MakeBatch, ForwardSimulationSatisfiesModel) {
  const Flight f = direct_flight(500, {});
  const BatchProblem p = make_batch(ModelKind::kDirect, f.samples, f.gps);
  ASSERT_EQ(p.samples(), 500u);
  Eigen::Vector4d theta(kBeta.beta1, kBeta.beta2, 3.0, -2.0);
  EXPECT_LT((p.a * theta - p.b).lpNorm<Eigen::Infinity>(), 1e-12);

  const models::Environment env;
  const Flight g = indirect_flight(500, env);
  const BatchProblem q = make_batch(ModelKind::kIndirect, g.samples, g.gps, env);
  Eigen::VectorXd alpha(5);
  alpha << kAlpha.alpha0, kAlpha.alpha1, kAlpha.alpha2, -1.0, 2.5;
  EXPECT_LT((q.a * alpha - q.b).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(SolveBatch, RecoversDirectUnknowns) {
  const Flight f = direct_flight(2000, {});
  const BatchSolution s = solve_batch(make_batch(ModelKind::kDirect, f.samples, f.gps));
  EXPECT_FALSE(s.ill_conditioned);
  EXPECT_LT(relative_error(s.direct().beta1, kBeta.beta1), 1e-9);
  EXPECT_LT(relative_error(s.direct().beta2, kBeta.beta2), 1e-9);
  EXPECT_LT(relative_error(s.wind.v_wn, 3.0), 1e-9);
  EXPECT_LT(relative_error(s.wind.v_we, -2.0), 1e-9);
  EXPECT_LT(s.residual_rms, 1e-10);
}

TEST(SolveBatch, RecoversIndirectUnknowns) {
  const models::Environment env;
  const Flight f = indirect_flight(2000, env);
  const BatchSolution s = solve_batch(make_batch(ModelKind::kIndirect, f.samples, f.gps, env));
  EXPECT_LT(relative_error(s.indirect().alpha0, kAlpha.alpha0), 1e-9);
  EXPECT_LT(relative_error(s.indirect().alpha1, kAlpha.alpha1), 1e-9);
  EXPECT_LT(relative_error(s.indirect().alpha2, kAlpha.alpha2), 1e-7);
  EXPECT_LT(relative_error(s.wind.v_wn, -1.0), 1e-9);
  EXPECT_LT(relative_error(s.wind.v_we, 2.5), 1e-9);
  EXPECT_THROW(s.direct(), std::logic_error);
}

TEST(SolveBatch, QuarterTurnIsEnough) {
  const Flight f = direct_flight(600, {}, 2400.0);
  const BatchSolution s = solve_batch(make_batch(ModelKind::kDirect, f.samples, f.gps));
  EXPECT_LT(relative_error(s.direct().beta2, kBeta.beta2), 1e-9);
  EXPECT_LT(relative_error(s.wind.v_we, -2.0), 1e-9);
}

TEST(SolveBatch, ZeroWind) {
  const Flight f = direct_flight(800, {{0.0, 0.0}, {0.0, 0.0}, -1});
  const BatchSolution s = solve_batch(make_batch(ModelKind::kDirect, f.samples, f.gps));
  EXPECT_LT(std::abs(s.wind.v_wn), 1e-9);
  EXPECT_LT(std::abs(s.wind.v_we), 1e-9);
}

TEST(SolveBatch, SingleSteadyHeadingIsIllConditioned) {
  const Flight f = direct_flight(300, {}, 0.0, 0.0, true);
  const BatchSolution s = solve_batch(make_batch(ModelKind::kDirect, f.samples, f.gps));
  EXPECT_TRUE(s.ill_conditioned);
  EXPECT_GT(s.condition, kIllConditionedThreshold);
  EXPECT_FALSE(s.warnings.empty());
}

TEST(SolveBatch, ResidualOrthogonalToColumns) {
  const Flight f = direct_flight(1500, {}, 600.0, 0.5);
  const BatchProblem p = make_batch(ModelKind::kDirect, f.samples, f.gps);
  const BatchSolution s = solve_batch(p);
  const Eigen::VectorXd atr = p.a.transpose() * (p.a * s.theta - p.b);
  const Eigen::VectorXd atb = p.a.transpose() * p.b;
  // Column by column, since the columns differ by many orders of magnitude.
  for (Eigen::Index j = 0; j < atr.size(); ++j) {
    EXPECT_LE(std::abs(atr(j)), 1e-8 * std::abs(atb(j))) << "column " << j;
  }
}

TEST(SolveBatch, ConstantOffsetGoesIntoWind) {
  const Flight f = direct_flight(1000, {}, 600.0, 0.3);
  BatchProblem p = make_batch(ModelKind::kDirect, f.samples, f.gps);
  const BatchSolution base = solve_batch(p);
  for (Eigen::Index i = 0; i < p.b.size(); i += 2) {
    p.b(i) += 1.25;
    p.b(i + 1) -= 0.75;
  }
  const BatchSolution shifted = solve_batch(p);
  EXPECT_LT(relative_error(shifted.direct().beta1, base.direct().beta1), 1e-9);
  EXPECT_LT(relative_error(shifted.direct().beta2, base.direct().beta2), 1e-9);
  EXPECT_NEAR(shifted.wind.v_wn, base.wind.v_wn + 1.25, 1e-9);
  EXPECT_NEAR(shifted.wind.v_we, base.wind.v_we - 0.75, 1e-9);
}

TEST(SolveBatch, RejectsUnderdeterminedAndBadInput) {
  const Flight f = direct_flight(1, {});
  EXPECT_THROW(solve_batch(make_batch(ModelKind::kDirect, f.samples, f.gps)), RankDeficientError);
  const Flight g = direct_flight(10, {});
  BatchProblem p = make_batch(ModelKind::kDirect, g.samples, g.gps);
  p.b(3) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(solve_batch(p), NonFiniteError);
  p.kind = ModelKind::kIndirect;
  EXPECT_THROW(solve_batch(p), std::invalid_argument);
}

TEST(Rls, MatchesBatchAfterOnePass) {
  const Flight f = direct_flight(1500, {}, 600.0, 0.2);
  const BatchProblem p = make_batch(ModelKind::kDirect, f.samples, f.gps);
  const BatchSolution batch = solve_batch(p);
  RlsState s = make_rls(4, {.lambda_f = 1.0, .p0 = 1e8, .scale = parameter_scales(p)});
  rls_run(s, p);
  const Eigen::VectorXd theta = s.theta();
  for (Eigen::Index j = 0; j < 4; ++j) {
    EXPECT_LT(relative_error(theta(j), batch.theta(j)), 1e-6) << "unknown " << j;
  }
}

TEST(Rls, PrefixEquivalence) {
  const Flight f = direct_flight(900, {}, 600.0, 0.2);
  const BatchProblem full = make_batch(ModelKind::kDirect, f.samples, f.gps);
  RlsState s = make_rls(4, {.scale = parameter_scales(full)});
  for (Eigen::Index i = 0; i < 300; ++i) {
    rls_update(s, full.a.middleRows(2 * i, 2), full.b.segment(2 * i, 2));
  }
  BatchProblem prefix{ModelKind::kDirect, full.a.topRows(600), full.b.head(600)};
  const BatchSolution batch = solve_batch(prefix);
  for (Eigen::Index j = 0; j < 4; ++j)
    EXPECT_LT(relative_error(s.theta()(j), batch.theta(j)), 1e-6);
}

TEST(Rls, ZeroInformationRowLeavesEstimate) {
  RlsState s = make_rls(4, {.theta0 = Eigen::Vector4d(0.02, -5e11, 1.0, 2.0)});
  const Eigen::VectorXd before = s.theta();
  const Eigen::MatrixXd cov = s.p_cov;
  rls_update(s, Eigen::MatrixXd::Zero(1, 4), Eigen::VectorXd::Constant(1, 7.0));
  EXPECT_EQ(s.theta(), before);
  EXPECT_TRUE(s.p_cov.isApprox(cov, 1e-15));
}

TEST(Rls, CovarianceStaysSymmetric) {
  const Flight f = direct_flight(400, {}, 300.0, 0.5);
  const BatchProblem p = make_batch(ModelKind::kDirect, f.samples, f.gps);
  RlsState s = make_rls(4, {.lambda_f = 0.99, .scale = parameter_scales(p)});
  rls_run(s, p);
  EXPECT_EQ(s.p_cov, s.p_cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.p_cov);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_LE(s.p_cov.trace(), s.p_cap * (1.0 + 1e-12));
}

TEST(Rls, TracksWindStep) {
  constexpr double kLambda = 0.995;
  const int step = 1200;
  const int horizon = static_cast<int>(3.0 / (1.0 - kLambda));
  const WindSchedule wind{{3.0, -2.0}, {-1.0, 4.0}, step};
  const Flight f = direct_flight(step + horizon, wind, 300.0);
  const BatchProblem p = make_batch(ModelKind::kDirect, f.samples, f.gps);
  // Seeded with the airframe coefficients; only the wind has to move.
  RlsState s = make_rls(4, {.lambda_f = kLambda,
                            .scale = parameter_scales(p),
                            .theta0 = Eigen::Vector4d(kBeta.beta1, kBeta.beta2, 0.0, 0.0)});
  rls_run(s, p);
  const Eigen::VectorXd theta = s.theta();
  const double magnitude = std::hypot(wind.after.v_wn, wind.after.v_we);
  EXPECT_LT(std::hypot(theta(2) - wind.after.v_wn, theta(3) - wind.after.v_we), 0.05 * magnitude);
}

TEST(Rls, RejectsBadOptions) {
  EXPECT_THROW(make_rls(4, {.lambda_f = 0.0}), std::invalid_argument);
  EXPECT_THROW(make_rls(4, {.lambda_f = 1.1}), std::invalid_argument);
  EXPECT_THROW(make_rls(4, {.p0 = 0.0}), std::invalid_argument);
  EXPECT_THROW(make_rls(4, {.scale = Eigen::Vector3d::Ones()}), std::invalid_argument);
  RlsState s = make_rls(4);
  EXPECT_THROW(rls_update(s, Eigen::MatrixXd::Zero(1, 5), Eigen::VectorXd::Zero(1)),
               std::invalid_argument);
}

}  // namespace
}  // namespace propas::inflight
