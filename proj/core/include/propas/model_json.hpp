#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "propas/airspeed_models.hpp"
#include "propas/inflight_id.hpp"
#include "propas/sparse_id.hpp"

namespace propas {

struct TrainingMetadata {
  std::string dataset;
  double rho = 1.225;        // [kg/m^3]
  double diameter = 0.2286;  // [m]
  std::optional<double> eta;
};

struct Term {
  std::string name;
  double coefficient = 0.0;
};

/// Airspeed model as a sum of named library terms.
///
/// Direct: V_a = sum c_k f_k(P, omega, omega_dot).
/// Indirect: V_a = (omega / 2 pi) D sum c_k C_P^k, with "cp0" the constant.
struct AirspeedModel {
  models::ModelKind kind = models::ModelKind::kDirect;
  std::vector<Term> terms;
  TrainingMetadata training;
  std::optional<inflight::WindEstimate> wind;
  /// Free-form fit diagnostics (support, CV error, conditioning).
  nlohmann::json diagnostics = nlohmann::json::object();

  static AirspeedModel from(const models::DirectCoefficients& c);
  static AirspeedModel from(const models::IndirectCoefficients& c);

  /// Set when the terms are exactly those of the two-term direct form.
  std::optional<models::DirectCoefficients> direct() const;
  /// Set when the terms are a subset of {cp0, cp1, cp4}.
  std::optional<models::IndirectCoefficients> indirect() const;

  /// Negative predictions are clamped to zero and flagged. Density falls
  /// back to env.rho; only the indirect form uses it.
  models::AirspeedEstimate evaluate(const models::PowerSample& s, const models::Environment& env,
                                    double omega_dot = 0.0) const;

  /// Throws SchemaError for a term name outside the library.
  void check_terms() const;

  /// Unclamped airspeed contribution of one term at unit coefficient.
  /// Indirect terms read r.c_p and scale by (omega / 2 pi) D.
  static double term_response(models::ModelKind kind, const std::string& name,
                              const sparse::RegressionRecord& r, double diameter);
};

std::string to_string(models::ModelKind kind);
models::ModelKind parse_model_kind(const std::string& text);

nlohmann::json to_json(const AirspeedModel& m);
/// Throws SchemaError.
AirspeedModel model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const AirspeedModel& m);
AirspeedModel load_model(const std::filesystem::path& path);

/// Pretty-printed JSON written atomically.
void save_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace propas
