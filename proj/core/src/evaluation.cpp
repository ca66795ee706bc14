#include "propas/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "propas/airspeed_models.hpp"
#include "propas/errors.hpp"

namespace propas::eval {

std::vector<double> compute_airspeed_truth(std::span<const log::FlightRecord> records,
                                           double lever_arm) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (!r.v_pitot || !r.omega_x) {
      throw MissingPitotError("airspeed truth needs v_pitot_mps and omega_x at t = " +
                              std::to_string(r.t));
    }
    out.push_back(models::pitot_correction(*r.v_pitot, *r.omega_x, lever_arm));
  }
  return out;
}

EvalReport evaluate(std::span<const double> predictions, std::span<const double> truth,
                    std::optional<double> range_override, std::size_t total_rows) {
  if (predictions.size() != truth.size()) {
    throw std::invalid_argument("evaluate: prediction and truth lengths differ");
  }
  if (truth.empty()) throw EmptyAfterGateError("evaluate: no samples left after gating");
  if (total_rows != 0 && total_rows < truth.size()) {
    throw std::invalid_argument("evaluate: total_rows below sample count");
  }

  EvalReport r;
  r.n_samples = truth.size();
  double sq = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predictions[i] - truth[i];
    sq += e * e;
  }
  r.rmse = std::sqrt(sq / static_cast<double>(truth.size()));
  if (!std::isfinite(r.rmse)) throw NonFiniteError("evaluate: non-finite series");

  if (range_override) {
    if (!(*range_override > 0.0))
      throw std::invalid_argument("evaluate: range override must be positive");
    r.normalization_range = *range_override;
  } else {
    const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
    r.normalization_range = *hi - *lo;
    if (!(r.normalization_range > 0.0)) {
      throw DegenerateFitError("evaluate: truth has zero range; supply a range override");
    }
  }
  r.nrmse = r.rmse / r.normalization_range;
  r.gated_fraction =
      total_rows == 0 ? 1.0 : static_cast<double>(truth.size()) / static_cast<double>(total_rows);
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"rmse_mps", r.rmse},
          {"nrmse", r.nrmse},
          {"normalization_range_mps", r.normalization_range},
          {"n_samples", r.n_samples},
          {"gated_fraction", r.gated_fraction}};
}

}  // namespace propas::eval
