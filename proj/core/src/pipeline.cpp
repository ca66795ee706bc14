#include "propas/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "propas/errors.hpp"
#include "propas/evaluation.hpp"
#include "propas/least_squares.hpp"
#include "propas/units.hpp"

namespace propas::pipeline {

models::PowerSample power_sample(const log::FlightRecord& r, std::optional<double> eta) {
  const double p_in = models::input_power({r.voltage, r.current, r.omega});
  return {eta ? models::propeller_power(p_in, *eta) : p_in, r.omega, r.rho};
}

std::vector<double> omega_rate(std::span<const log::FlightRecord> records) {
  const std::size_t n = records.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? i : i + 1;
    out[i] = (records[hi].omega - records[lo].omega) / (records[hi].t - records[lo].t);
  }
  return out;
}

GateDecision gate_record(const log::FlightRecord& r, double v_hat, const gate::GateConfig& cfg) {
  const Eigen::Vector3d v(r.v_n, r.v_e, r.v_d);
  if (v.norm() == 0.0) return {false, std::numeric_limits<double>::quiet_NaN()};
  const double alpha = gate::angle_of_attack(r.theta, v, cfg.gamma_sign);
  return {gate::gate(alpha, v_hat, cfg), alpha};
}

inflight::GpsRow gps_row(const log::FlightRecord& r, gate::GammaSign sign) {
  const Eigen::Vector3d v(r.v_n, r.v_e, r.v_d);
  return {r.v_n, r.v_e, r.v_d, r.psi, gate::flight_path_angle(v, sign)};
}

std::optional<double> effective_eta(const Config& cfg, const AirspeedModel* model) {
  if (cfg.eta) return cfg.eta;
  if (model && model->training.eta) return model->training.eta;
  return std::nullopt;
}

EstimateResult estimate(const AirspeedModel& model, std::span<const log::FlightRecord> records,
                        const Config& cfg) {
  EstimateResult out;
  out.total = records.size();
  const auto eta = effective_eta(cfg, &model);
  const auto rates = omega_rate(records);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!(r.omega > 0.0)) continue;
    const auto est = model.evaluate(power_sample(r, eta), cfg.env, rates[i]);
    if (!gate_record(r, est.v_a, cfg.gate).pass) continue;
    out.rows.push_back({r.t, est.v_a, est.clamped});
    out.source_index.push_back(i);
  }
  out.gated_fraction =
      out.total == 0 ? 0.0 : static_cast<double>(out.rows.size()) / static_cast<double>(out.total);
  return out;
}

namespace {

AirspeedModel model_from_theta(models::ModelKind kind, const Eigen::VectorXd& theta) {
  AirspeedModel m =
      kind == models::ModelKind::kDirect
          ? AirspeedModel::from(models::DirectCoefficients{theta(0), theta(1)})
          : AirspeedModel::from(models::IndirectCoefficients{theta(0), theta(1), theta(2)});
  const auto k = theta.size();
  m.wind = inflight::WindEstimate{theta(k - 2), theta(k - 1)};
  return m;
}

std::optional<Eigen::VectorXd> seed_theta(const AirspeedModel& seed, models::ModelKind kind) {
  const double wn = seed.wind ? seed.wind->v_wn : 0.0;
  const double we = seed.wind ? seed.wind->v_we : 0.0;
  if (kind == models::ModelKind::kDirect) {
    const auto d = seed.direct();
    if (!d) return std::nullopt;
    Eigen::VectorXd t(4);
    t << d->beta1, d->beta2, wn, we;
    return t;
  }
  const auto c = seed.indirect();
  if (!c) return std::nullopt;
  Eigen::VectorXd t(5);
  t << c->alpha0, c->alpha1, c->alpha2, wn, we;
  return t;
}

nlohmann::json selection_json(const sparse::SelectedModel& s, const sparse::LassoPath& path) {
  return {{"support", s.support},
          {"lambda_selected", s.lambda_selected},
          {"lambda_index", s.lambda_index},
          {"cv_error", s.cv_error},
          {"fit_rmse", s.fit_rmse},
          {"folds", path.folds},
          {"n_lambdas", path.lambdas.size()},
          {"warnings", s.warnings}};
}

sparse::FeatureLibrary library_for(models::ModelKind kind,
                                   const std::vector<sparse::RegressionRecord>& records,
                                   const Config& cfg, double diameter) {
  if (kind == models::ModelKind::kDirect)
    return sparse::build_features_direct(records, cfg.library);
  return sparse::build_features_indirect(records, diameter, cfg.indirect_degree);
}

}  // namespace

Identification identify_gps(std::span<const log::FlightRecord> records,
                            const IdentifyOptions& options, const Config& cfg) {
  std::vector<models::PowerSample> samples;
  std::vector<inflight::GpsRow> gps;
  const auto eta = cfg.eta;
  for (const auto& r : records) {
    if (!(r.omega > 0.0)) continue;
    const auto sample = power_sample(r, eta);
    const double v_hat = options.seed ? options.seed->evaluate(sample, cfg.env).v_a
                                      : std::sqrt(r.v_n * r.v_n + r.v_e * r.v_e + r.v_d * r.v_d);
    if (!gate_record(r, v_hat, cfg.gate).pass) continue;
    samples.push_back(sample);
    gps.push_back(gps_row(r, cfg.gate.gamma_sign));
  }
  if (samples.empty())
    throw EmptyAfterGateError("identify-gps: no samples pass the forward-flight gate");

  Identification out;
  out.total = records.size();
  out.used = samples.size();
  const auto problem = inflight::make_batch(options.kind, samples, gps, cfg.env);
  out.batch = inflight::solve_batch(problem);

  Eigen::VectorXd theta = out.batch.theta;
  if (options.rls) {
    inflight::RlsOptions ro;
    ro.lambda_f = cfg.rls_lambda_f;
    ro.p0 = cfg.rls_p0;
    ro.scale = inflight::parameter_scales(problem);
    if (options.seed) {
      if (auto t = seed_theta(*options.seed, options.kind)) ro.theta0 = *t;
    }
    auto state = inflight::make_rls(inflight::unknown_count(options.kind), ro);
    inflight::rls_run(state, problem);
    theta = state.theta();
  }
  if (!theta.allFinite()) throw NonFiniteError("identify-gps: non-finite estimate");

  out.model = model_from_theta(options.kind, theta);
  out.model.training = {"gps", cfg.env.rho, cfg.env.diameter, eta};
  out.model.diagnostics = {{"method", options.rls ? "rls" : "batch"},
                           {"condition", out.batch.condition},
                           {"ill_conditioned", out.batch.ill_conditioned},
                           {"residual_rms_mps", out.batch.residual_rms},
                           {"samples_used", out.used},
                           {"samples_total", out.total},
                           {"warnings", out.batch.warnings}};
  return out;
}

std::vector<sparse::RegressionRecord> bem_regression_records(
    const std::vector<bem::DatasetRow>& rows, dataset::ForwardBranch* branch) {
  auto fb = dataset::forward_branch(rows);
  std::vector<sparse::RegressionRecord> out;
  out.reserve(fb.rows.size());
  for (const auto& r : fb.rows) out.push_back({r.power, r.omega, 0.0, r.c_p, r.v_a});
  if (branch) *branch = std::move(fb);
  return out;
}

std::vector<sparse::RegressionRecord> flight_regression_records(
    std::span<const log::FlightRecord> records, const Config& cfg) {
  const auto truth = eval::compute_airspeed_truth(records, cfg.env.lever_arm);
  const auto rates = omega_rate(records);
  std::vector<sparse::RegressionRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!(r.omega > 0.0)) continue;
    if (!gate_record(r, truth[i], cfg.gate).pass) continue;
    const auto s = power_sample(r, cfg.eta);
    const double cp =
        models::power_coefficient(s.power, s.omega, s.rho.value_or(cfg.env.rho), cfg.env.diameter);
    out.push_back({s.power, s.omega, rates[i], cp, truth[i]});
  }
  if (out.empty()) throw EmptyAfterGateError("no flight samples pass the forward-flight gate");
  return out;
}

DiscoveryResult discover_records(const std::vector<sparse::RegressionRecord>& records,
                                 models::ModelKind kind, const Config& cfg,
                                 const std::string& dataset_id) {
  if (records.size() < static_cast<std::size_t>(cfg.cv.folds)) {
    throw EmptyAfterGateError("discover: " + std::to_string(records.size()) + " rows for " +
                              std::to_string(cfg.cv.folds) + " folds");
  }
  DiscoveryResult out;
  out.rows = records.size();
  const auto lib = library_for(kind, records, cfg, cfg.env.diameter);
  out.discovery = sparse::discover(lib, records, cfg.cv);
  const auto& sel = out.discovery.model;

  AirspeedModel m;
  m.kind = kind;
  if (sel.has_intercept) m.terms.push_back({"cp0", sel.intercept});
  for (std::size_t i = 0; i < sel.support_columns.size(); ++i) {
    m.terms.push_back({lib.features[static_cast<std::size_t>(sel.support_columns[i])].name,
                       sel.coefficients(static_cast<Eigen::Index>(i))});
  }
  m.training = {dataset_id, cfg.env.rho, cfg.env.diameter, std::nullopt};
  m.diagnostics = selection_json(sel, out.discovery.path);
  m.diagnostics["rows"] = out.rows;
  m.diagnostics["seed"] = cfg.cv.seed;
  out.model = std::move(m);
  return out;
}

DiscoveryResult discover_bem(const std::vector<bem::DatasetRow>& rows, models::ModelKind kind,
                             const Config& cfg, const std::string& dataset_id) {
  dataset::ForwardBranch branch;
  const auto records = bem_regression_records(rows, &branch);
  Config local = cfg;
  const double d = dataset::infer_diameter(rows);
  if (d > 0.0) local.env.diameter = d;
  auto out = discover_records(records, kind, local, dataset_id);
  out.model.diagnostics["j_crit"] = branch.j_crit;
  if (d > 0.0 && std::abs(d - cfg.env.diameter) > 1e-6 * d) {
    out.model.diagnostics["warnings"].push_back("dataset diameter " + std::to_string(d) +
                                                " m differs from configured diameter");
  }
  out.branch = std::move(branch);
  return out;
}

std::vector<std::string> default_support(models::ModelKind kind) {
  if (kind == models::ModelKind::kDirect) return {"omega", "P2_over_omega5"};
  return {"cp0", "cp1", "cp4"};
}

AirspeedModel fit_support(const std::vector<sparse::RegressionRecord>& records,
                          models::ModelKind kind, const std::vector<std::string>& support,
                          const Config& cfg, const std::string& dataset_id) {
  if (records.empty()) throw EmptyAfterGateError("fit: no rows");
  if (support.empty()) throw SchemaError("fit: empty support");

  AirspeedModel m;
  m.kind = kind;
  for (const auto& name : support) m.terms.push_back({name, 1.0});
  m.check_terms();

  // Each column is the model's response to one term at unit coefficient.
  const auto n = static_cast<Eigen::Index>(records.size());
  const auto k = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd a(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j) {
      a(i, j) = AirspeedModel::term_response(kind, support[static_cast<std::size_t>(j)], r,
                                             cfg.env.diameter);
    }
    y(i) = r.v_a;
  }
  const auto sol = solve_least_squares(a, y);
  if (sol.rank < k) throw RankDeficientError("fit: support columns are linearly dependent");
  if (!sol.x.allFinite()) throw NonFiniteError("fit: non-finite coefficients");
  for (Eigen::Index j = 0; j < k; ++j) m.terms[static_cast<std::size_t>(j)].coefficient = sol.x(j);
  m.training = {dataset_id, cfg.env.rho, cfg.env.diameter, cfg.eta};
  m.diagnostics = {{"support", support},
                   {"rows", records.size()},
                   {"fit_rmse", sol.residual_rms},
                   {"condition", sol.condition}};
  return m;
}

}  // namespace propas::pipeline
