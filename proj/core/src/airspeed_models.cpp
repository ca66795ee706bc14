#include "propas/airspeed_models.hpp"

#include <cmath>
#include <stdexcept>

#include "propas/errors.hpp"
#include "propas/units.hpp"

namespace propas::models {

namespace {

void require_positive_omega(double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
}

AirspeedEstimate clamp(double v) {
  if (v < 0.0) return {0.0, true};
  return {v, false};
}

}  // namespace

void validate(const Environment& env) {
  if (!(env.diameter > 0.0)) throw std::invalid_argument("Environment: diameter must be positive");
  if (!(env.rho > 0.0)) throw std::invalid_argument("Environment: rho must be positive");
  if (!(env.lever_arm >= 0.0)) throw std::invalid_argument("Environment: lever arm must be >= 0");
}

double advance_ratio(double v_a, double omega, double diameter) {
  require_positive_omega(omega);
  if (!(diameter > 0.0)) throw std::invalid_argument("diameter must be positive");
  return units::kTwoPi * v_a / (omega * diameter);
}

double power_coefficient(double power, double omega, double rho, double diameter) {
  require_positive_omega(omega);
  if (!(rho > 0.0) || !(diameter > 0.0)) {
    throw std::invalid_argument("rho and diameter must be positive");
  }
  const double n = units::rad_s_to_rev_s(omega);
  return power / (rho * n * n * n * std::pow(diameter, 5));
}

double input_power(const EscFeedback& esc) { return esc.voltage * esc.current; }

double propeller_power(double input_power, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  return eta * input_power;
}

double pitot_correction(double v_pitot, double roll_rate, double lever_arm) {
  return v_pitot - roll_rate * lever_arm;
}

AirspeedEstimate eval_direct(const DirectCoefficients& c, const PowerSample& s) {
  require_positive_omega(s.omega);
  const double w = s.omega;
  const double w2 = w * w;
  return clamp(c.beta1 * w + c.beta2 * s.power * s.power / (w2 * w2 * w));
}

AirspeedEstimate eval_indirect(const IndirectCoefficients& c, double c_p, double omega,
                               double diameter) {
  require_positive_omega(omega);
  const double c_p2 = c_p * c_p;
  const double poly = c.alpha0 + c.alpha1 * c_p + c.alpha2 * c_p2 * c_p2;
  return clamp(units::rad_s_to_rev_s(omega) * diameter * poly);
}

EfficiencyEstimate estimate_efficiency(std::span<const gate::JcPoint> bem_points,
                                       std::span<const gate::JcPoint> flight_points) {
  if (flight_points.empty()) throw std::invalid_argument("estimate_efficiency: no flight points");
  EfficiencyEstimate out;
  out.cubic = gate::fit_cubic(bem_points);

  double cy = 0.0;
  double cc = 0.0;
  double yy = 0.0;
  for (const auto& p : flight_points) {
    const double c = out.cubic(p.j);
    cy += c * p.c_p;
    cc += c * c;
    yy += p.c_p * p.c_p;
  }
  if (!(cc > 1e-24 * yy) || cc == 0.0)
    throw DegenerateFitError("estimate_efficiency: cubic vanishes on flight J");
  const double inv_eta = cy / cc;
  if (!(inv_eta > 0.0) || !std::isfinite(inv_eta)) {
    throw DegenerateFitError("estimate_efficiency: non-positive power scale");
  }
  out.eta = 1.0 / inv_eta;
  out.exceeds_unity = out.eta > 1.0;
  return out;
}

}  // namespace propas::models
