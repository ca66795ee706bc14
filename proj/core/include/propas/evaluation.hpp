#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <vector>

#include "propas/flight_log.hpp"

namespace propas::eval {

/// Pitot airspeed corrected for the propeller offset, one value per record.
/// Throws MissingPitotError when any record lacks pitot or roll rate.
std::vector<double> compute_airspeed_truth(std::span<const log::FlightRecord> records,
                                           double lever_arm);

struct EvalReport {
  double rmse = 0.0;  // [m/s]
  double nrmse = 0.0;
  double normalization_range = 0.0;  // [m/s]
  std::size_t n_samples = 0;
  double gated_fraction = 1.0;
};

/// RMSE and range-normalized RMSE. `total_rows` is the row count before
/// gating (0 means the series were not gated). Throws EmptyAfterGateError
/// for empty series and DegenerateFitError for a zero range without override.
EvalReport evaluate(std::span<const double> predictions, std::span<const double> truth,
                    std::optional<double> range_override = std::nullopt,
                    std::size_t total_rows = 0);

nlohmann::json to_json(const EvalReport& r);

}  // namespace propas::eval
