#include <benchmark/benchmark.h>

#include <random>

#include "propas/bem_rotor.hpp"
#include "propas/blade_io.hpp"
#include "propas/config.hpp"
#include "propas/inflight_id.hpp"
#include "propas/pipeline.hpp"
#include "propas/sparse_id.hpp"
#include "propas/synthetic.hpp"
#include "propas/units.hpp"

namespace {

using namespace propas;

const bem::BladeGeometry& geometry() {
  static const auto g = bem::load_geometry(PROPAS_DATA_DIR "/sample_prop.geom");
  return g;
}

const bem::AirfoilPolar& polar() {
  static const auto p = bem::load_polar(PROPAS_DATA_DIR "/sample_airfoil.polar");
  return p;
}

void BM_SolveRotor(benchmark::State& state) {
  const bem::FlowCondition flow{15.0, units::rpm_to_rad_s(7000.0), 1.225};
  for (auto _ : state) benchmark::DoNotOptimize(bem::solve_rotor(geometry(), polar(), flow));
}
BENCHMARK(BM_SolveRotor);

void BM_CvLasso(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, 25);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  Eigen::VectorXd y = x.col(1) - 0.5 * x.col(5);
  for (Eigen::Index i = 0; i < n; ++i) y(i) += 0.1 * g(rng);
  const auto s = sparse::fit_standardization(x, y);
  const Eigen::MatrixXd xs = s.apply(x);
  const Eigen::VectorXd yc = y.array() - s.y_mean;
  for (auto _ : state) benchmark::DoNotOptimize(sparse::cv_lasso(xs, yc));
}
BENCHMARK(BM_CvLasso)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

inflight::BatchProblem flight_problem(double cruise_s) {
  Config cfg;
  cfg.eta = 0.87;
  synthetic::FlightOptions opts;
  opts.cruise_s = cruise_s;
  opts.velocity_noise = 0.3;
  const auto records = synthetic::simulate_flight(opts);
  std::vector<models::PowerSample> samples;
  std::vector<inflight::GpsRow> gps;
  for (const auto& r : records) {
    if (!pipeline::gate_record(r, std::hypot(r.v_n, r.v_e, r.v_d), cfg.gate).pass) continue;
    samples.push_back(pipeline::power_sample(r, cfg.eta));
    gps.push_back(pipeline::gps_row(r, cfg.gate.gamma_sign));
  }
  return inflight::make_batch(models::ModelKind::kDirect, samples, gps, cfg.env);
}

void BM_SolveBatch(benchmark::State& state) {
  const auto problem = flight_problem(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(inflight::solve_batch(problem));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(problem.samples()));
}
BENCHMARK(BM_SolveBatch)->Arg(60)->Arg(600);

void BM_RlsUpdate(benchmark::State& state) {
  const auto problem = flight_problem(60.0);
  const auto scales = inflight::parameter_scales(problem);
  const Eigen::MatrixXd rows = problem.a.topRows(2);
  const Eigen::VectorXd targets = problem.b.head(2);
  auto rls = inflight::make_rls(4, {.lambda_f = 0.999, .scale = scales});
  for (auto _ : state) {
    inflight::rls_update(rls, rows, targets);
    benchmark::DoNotOptimize(rls.theta_scaled.data());
  }
}
BENCHMARK(BM_RlsUpdate);

}  // namespace

BENCHMARK_MAIN();
