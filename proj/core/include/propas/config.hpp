#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>

#include "propas/airspeed_models.hpp"
#include "propas/bem_rotor.hpp"
#include "propas/flight_log.hpp"
#include "propas/regime_gate.hpp"
#include "propas/sparse_id.hpp"

namespace propas {

/// Run configuration. Every field has a usable default; a config file only
/// needs the keys it changes.
///
///   [environment] diameter_m rho_kg_m3 lever_arm_m eta
///   [gate]        alpha_th_deg v_min_mps gamma_sign (literal | ned)
///   [sweep]       v_min_mps v_max_mps v_steps rpm_min rpm_max rpm_steps
///   [lasso]       folds seed n_lambdas lambda_ratio tolerance max_sweeps
///                 max_power_exponent min_omega_exponent max_omega_exponent
///                 include_omega_dot indirect_degree
///   [rls]         lambda_f p0
///   [ingest]      omega_unit (rad_s | rpm) angle_unit (rad | deg) smoothing_window
///   [simulate]    seed
struct Config {
  models::Environment env;
  /// Electro-mechanical efficiency. Unset means flight power is used as
  /// measured and identified coefficients absorb the efficiency.
  std::optional<double> eta;
  gate::GateConfig gate;
  bem::SweepRange v_sweep{0.0, 30.0, 31};
  bem::SweepRange rpm_sweep{1000.0, 10000.0, 46};
  sparse::CvOptions cv;
  sparse::DirectLibraryOptions library;
  int indirect_degree = 6;
  double rls_lambda_f = 1.0;
  double rls_p0 = 1e8;
  log::UnitConfig units;
  std::size_t smoothing_window = 0;
  std::uint64_t simulate_seed = 1;
};

/// Throws SchemaError on unknown sections or keys and malformed values.
Config parse_config(std::istream& in);
Config load_config(const std::filesystem::path& path);

}  // namespace propas
