#include "propas/synthetic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "propas/units.hpp"

namespace propas::synthetic {

namespace {

double wrap_pi(double a) { return std::remainder(a, units::kTwoPi); }

}  // namespace

std::size_t hover_rows(const FlightOptions& o) {
  return static_cast<std::size_t>(std::llround(o.hover_s * o.rate_hz));
}

std::vector<log::FlightRecord> simulate_flight(const FlightOptions& o) {
  if (!(o.rate_hz > 0.0) || o.hover_s < 0.0 || o.cruise_s < 0.0) {
    throw std::invalid_argument("simulate_flight: bad timing");
  }
  if (!(o.truth.beta1 > 0.0) || o.truth.beta2 == 0.0) {
    throw std::invalid_argument("simulate_flight: need beta1 > 0 and beta2 != 0");
  }
  if (!(o.eta > 0.0 && o.eta <= 1.0)) throw std::invalid_argument("simulate_flight: bad eta");

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto gps_noise = [&] { return o.velocity_noise > 0.0 ? o.velocity_noise * noise(rng) : 0.0; };

  const std::size_t n_hover = hover_rows(o);
  const auto n_cruise = static_cast<std::size_t>(std::llround(o.cruise_s * o.rate_hz));
  std::vector<log::FlightRecord> out;
  out.reserve(n_hover + n_cruise);

  for (std::size_t i = 0; i < n_hover; ++i) {
    log::FlightRecord r;
    r.t = o.t0 + static_cast<double>(i) / o.rate_hz;
    r.voltage = o.voltage;
    r.current = o.hover_power / o.eta / o.voltage;
    r.omega = o.hover_omega;
    r.v_pitot = 0.0;
    r.omega_x = 0.0;
    r.theta = 0.0;
    r.psi = o.heading0;
    r.v_n = gps_noise();
    r.v_e = gps_noise();
    r.v_d = -o.hover_climb + gps_noise();
    r.rho = o.env.rho;
    out.push_back(r);
  }

  const double two_pi = units::kTwoPi;
  const double sign = o.truth.beta2 > 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n_cruise; ++i) {
    const double tc = static_cast<double>(i) / o.rate_hz;
    const double amp_v = o.steady ? 0.0 : o.airspeed_amp;
    const double amp_m = o.steady ? 0.0 : o.margin_amp;
    const double v_a = o.airspeed_mean + amp_v * std::sin(two_pi * tc / o.airspeed_period_s);
    const double margin = o.margin_mean + amp_m * std::sin(two_pi * tc / o.margin_period_s + 1.0);
    // beta2 P^2 / omega^5 = v_a - beta1 omega carries the sign of beta2.
    const double omega = (v_a - sign * margin) / o.truth.beta1;
    if (!(omega > 0.0) || !(margin > 0.0)) {
      throw std::invalid_argument(
          "simulate_flight: airspeed profile not reachable with these coefficients");
    }
    const double power = std::sqrt(margin * std::pow(omega, 5) / std::abs(o.truth.beta2));

    const double psi = o.heading == HeadingProfile::kSweep
                           ? wrap_pi(o.heading0 + two_pi * tc / o.turn_period_s)
                           : o.heading0;
    const double roll_rate = o.steady ? 0.0 : 0.2 * std::sin(two_pi * tc / 13.0);

    log::FlightRecord r;
    r.t = o.t0 + static_cast<double>(n_hover + i) / o.rate_hz;
    r.voltage = o.voltage;
    r.current = power / o.eta / o.voltage;
    r.omega = omega;
    r.omega_x = roll_rate;
    r.v_pitot = v_a + roll_rate * o.env.lever_arm;
    r.theta = units::deg_to_rad(o.alpha_deg);
    r.psi = psi;
    r.v_n = v_a * std::cos(psi) + o.wind.v_wn + gps_noise();
    r.v_e = v_a * std::sin(psi) + o.wind.v_we + gps_noise();
    r.v_d = gps_noise();
    r.rho = o.env.rho;
    out.push_back(r);
  }
  return out;
}

}  // namespace propas::synthetic
