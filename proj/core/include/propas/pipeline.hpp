#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "propas/config.hpp"
#include "propas/dataset.hpp"
#include "propas/flight_log.hpp"
#include "propas/inflight_id.hpp"
#include "propas/model_json.hpp"
#include "propas/sparse_id.hpp"

namespace propas::pipeline {

/// Shaft power eta * V * I, or electrical input power when eta is unset.
models::PowerSample power_sample(const log::FlightRecord& r, std::optional<double> eta);

/// Central-difference rotor acceleration, one-sided at the ends.
std::vector<double> omega_rate(std::span<const log::FlightRecord> records);

struct GateDecision {
  bool pass = false;
  double alpha = 0.0;  // [rad], NaN when the ground velocity is zero
};

/// Forward-flight gate for one record given an airspeed estimate. A zero
/// ground velocity fails the gate.
GateDecision gate_record(const log::FlightRecord& r, double v_hat, const gate::GateConfig& cfg);

inflight::GpsRow gps_row(const log::FlightRecord& r, gate::GammaSign sign);

/// Efficiency used to turn logged electrical power into shaft power:
/// the configured value, else the model's training value, else none.
std::optional<double> effective_eta(const Config& cfg, const AirspeedModel* model);

struct EstimateRow {
  double t = 0.0;
  double v_hat = 0.0;
  bool clamped = false;
};

struct EstimateResult {
  std::vector<EstimateRow> rows;
  std::vector<std::size_t> source_index;  // record index of each row
  std::size_t total = 0;
  double gated_fraction = 0.0;
};

/// Applies the model and the gate to every record; only gated rows are kept.
EstimateResult estimate(const AirspeedModel& model, std::span<const log::FlightRecord> records,
                        const Config& cfg);

struct IdentifyOptions {
  models::ModelKind kind = models::ModelKind::kDirect;
  bool rls = false;
  /// Prior model: gates on its estimate and seeds the RLS.
  std::optional<AirspeedModel> seed;
};

struct Identification {
  AirspeedModel model;
  inflight::BatchSolution batch;
  std::size_t used = 0;
  std::size_t total = 0;
};

/// Gated GPS identification. Without a seed model the low-speed limit of
/// the gate is applied to the ground speed. Throws EmptyAfterGateError.
Identification identify_gps(std::span<const log::FlightRecord> records,
                            const IdentifyOptions& options, const Config& cfg);

struct DiscoveryResult {
  sparse::Discovery discovery;
  AirspeedModel model;
  std::optional<dataset::ForwardBranch> branch;
  std::size_t rows = 0;
};

/// LASSO structure discovery on the forward branch of a BEM grid.
DiscoveryResult discover_bem(const std::vector<bem::DatasetRow>& rows, models::ModelKind kind,
                             const Config& cfg, const std::string& dataset_id = {});

/// Regression records from gated flight data with pitot truth.
std::vector<sparse::RegressionRecord> flight_regression_records(
    std::span<const log::FlightRecord> records, const Config& cfg);

DiscoveryResult discover_records(const std::vector<sparse::RegressionRecord>& records,
                                 models::ModelKind kind, const Config& cfg,
                                 const std::string& dataset_id = {});

/// Canonical support of each model form.
std::vector<std::string> default_support(models::ModelKind kind);

/// Unpenalized least squares restricted to `support`. Indirect fits treat
/// "cp0" as the intercept.
AirspeedModel fit_support(const std::vector<sparse::RegressionRecord>& records,
                          models::ModelKind kind, const std::vector<std::string>& support,
                          const Config& cfg, const std::string& dataset_id = {});

/// Regression records of the forward branch of a BEM grid.
std::vector<sparse::RegressionRecord> bem_regression_records(
    const std::vector<bem::DatasetRow>& rows, dataset::ForwardBranch* branch = nullptr);

}  // namespace propas::pipeline
