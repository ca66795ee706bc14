#pragma once

#include <optional>
#include <span>

#include "propas/regime_gate.hpp"

namespace propas::models {

/// One propeller operating point.
struct PowerSample {
  double power = 0.0;  // [W], negative when windmilling
  double omega = 0.0;  // [rad/s]
  std::optional<double> rho;

  bool windmilling() const { return power < 0.0; }
};

enum class ModelKind { kDirect, kIndirect };

struct Environment {
  double diameter = 0.2286;  // [m]
  double rho = 1.225;        // [kg/m^3]
  double lever_arm = 0.24;   // propeller lateral offset [m]
};

void validate(const Environment& env);

struct EscFeedback {
  double voltage = 0.0;  // [V]
  double current = 0.0;  // [A]
  double omega = 0.0;    // [rad/s]
};

/// V_a = beta1 omega + beta2 P^2 / omega^5
struct DirectCoefficients {
  double beta1 = 0.0;
  double beta2 = 0.0;
};

/// V_a = (omega / 2 pi) D (alpha0 + alpha1 C_P + alpha2 C_P^4)
struct IndirectCoefficients {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

/// Model output; negative predictions are clamped to zero and flagged.
struct AirspeedEstimate {
  double v_a = 0.0;
  bool clamped = false;
};

double advance_ratio(double v_a, double omega, double diameter);
double power_coefficient(double power, double omega, double rho, double diameter);
double input_power(const EscFeedback& esc);
double propeller_power(double input_power, double eta);

/// Freestream at a propeller offset by `lever_arm` from the roll axis.
double pitot_correction(double v_pitot, double roll_rate, double lever_arm);

AirspeedEstimate eval_direct(const DirectCoefficients& c, const PowerSample& s);
AirspeedEstimate eval_indirect(const IndirectCoefficients& c, double c_p, double omega,
                               double diameter);

/// Reference electro-mechanical efficiency of the ESC-motor system.
inline constexpr double kReferenceEta = 0.87;

struct EfficiencyEstimate {
  double eta = 1.0;
  gate::CubicFit cubic;
  /// Set when the flight data implies more shaft power than electrical input.
  bool exceeds_unity = false;
};

/// Fits a cubic to BEM (J, C_P) points, then the single scale 1/eta that maps
/// it onto flight (J, C_P_in) points in the least-squares sense.
EfficiencyEstimate estimate_efficiency(std::span<const gate::JcPoint> bem_points,
                                       std::span<const gate::JcPoint> flight_points);

}  // namespace propas::models
