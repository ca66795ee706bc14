#pragma once

#include <cstdint>
#include <vector>

#include "propas/airspeed_models.hpp"
#include "propas/flight_log.hpp"
#include "propas/inflight_id.hpp"

namespace propas::synthetic {

enum class HeadingProfile {
  kSweep,     // constant turn rate
  kConstant,  // straight line at heading0
};

/// Forward simulation of a flight log whose propeller data follow the direct
/// model exactly: a hover segment followed by level forward flight in a
/// constant wind.
struct FlightOptions {
  models::DirectCoefficients truth{2.55e-2, -6.85e11};
  inflight::WindEstimate wind{3.0, -2.0};
  double eta = models::kReferenceEta;
  models::Environment env;
  double rate_hz = 10.0;
  double t0 = 0.0;
  double hover_s = 20.0;
  double cruise_s = 300.0;
  HeadingProfile heading = HeadingProfile::kSweep;
  double heading0 = 0.0;        // [rad]
  double turn_period_s = 60.0;  // one full turn
  double airspeed_mean = 18.0;  // [m/s]
  double airspeed_amp = 4.0;
  double airspeed_period_s = 47.0;
  /// |beta1 omega - V_a|, varied independently of V_a so that both
  /// coefficients are excited.
  double margin_mean = 4.0;  // [m/s]
  double margin_amp = 1.5;
  double margin_period_s = 23.0;
  /// Constant airspeed and rotor state throughout cruise.
  bool steady = false;
  double alpha_deg = 3.0;
  double voltage = 22.2;        // [V]
  double hover_omega = 900.0;   // [rad/s]
  double hover_power = 180.0;   // [W]
  double hover_climb = 0.5;     // [m/s]
  double velocity_noise = 0.0;  // GPS velocity standard deviation [m/s]
  std::uint64_t seed = 1;
};

/// Throws std::invalid_argument when the truth coefficients admit no
/// positive rotor speed for the requested airspeeds.
std::vector<log::FlightRecord> simulate_flight(const FlightOptions& options);

/// Number of leading hover rows simulate_flight emits.
std::size_t hover_rows(const FlightOptions& options);

}  // namespace propas::synthetic
