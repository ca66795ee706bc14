#pragma once

#include <span>
#include <vector>

namespace propas::bem {

/// Tabulated section aerodynamics. Linear interpolation inside the table,
/// endpoint values held outside it.
class AirfoilPolar {
 public:
  AirfoilPolar(std::vector<double> alpha_rad, std::vector<double> cl, std::vector<double> cd);

  double cl(double alpha) const;
  double cd(double alpha) const;

  std::span<const double> alpha_grid() const { return alpha_; }
  std::span<const double> cl_table() const { return cl_; }
  std::span<const double> cd_table() const { return cd_; }

 private:
  double lookup(const std::vector<double>& table, double alpha) const;

  std::vector<double> alpha_;
  std::vector<double> cl_;
  std::vector<double> cd_;
};

struct BladeStation {
  double r = 0.0;      // [m]
  double chord = 0.0;  // [m]
  double twist = 0.0;  // [rad], measured from the rotor plane
};

class BladeGeometry {
 public:
  BladeGeometry(std::vector<BladeStation> stations, double hub_radius, double diameter,
                int blade_count);

  std::span<const BladeStation> stations() const { return stations_; }
  double hub_radius() const { return hub_radius_; }
  double tip_radius() const { return 0.5 * diameter_; }
  double diameter() const { return diameter_; }
  int blade_count() const { return blade_count_; }

  /// Chord and twist linearly interpolated between stations.
  BladeStation at(double r) const;

 private:
  std::vector<BladeStation> stations_;
  double hub_radius_;
  double diameter_;
  int blade_count_;
};

struct FlowCondition {
  double v_a = 0.0;    // axial freestream [m/s]
  double omega = 0.0;  // [rad/s]
  double rho = 1.225;  // [kg/m^3]
};

void validate(const FlowCondition& flow);

/// Converged state of one blade element.
///
/// Induction factors follow the sign convention of the single-residual
/// formulation, R(phi) = sin(phi)/(1 - a) - (V/(omega r)) cos(phi)/(1 + a').
/// For a thrusting propeller this makes `a` and `a_prime` negative. In
/// static operation (V = 0) both are reported as zero and the residual is
/// the static form sin^2(phi) - sigma' cn / (4F).
struct SectionSolution {
  double phi = 0.0;
  double a = 0.0;
  double a_prime = 0.0;
  double w = 0.0;         // local relative speed [m/s]
  double d_thrust = 0.0;  // per blade [N/m]
  double d_torque = 0.0;  // per blade [N m/m]
  double residual = 0.0;
};

/// Everything the residual evaluation produces at a trial inflow angle.
struct ResidualTerms {
  double residual = 0.0;
  double a = 0.0;
  double a_prime = 0.0;
  double cn = 0.0;
  double ct = 0.0;
  double loss_factor = 1.0;
};

/// Residual of the blade-element / momentum balance at inflow angle `phi`,
/// with Prandtl hub and tip losses.
ResidualTerms section_residual(const BladeGeometry& geom, const AirfoilPolar& polar,
                               const FlowCondition& flow, double r, double phi);

inline constexpr double kPhiLower = 1e-6;
inline constexpr double kResidualTolerance = 1e-8;
inline constexpr int kMaxBisectionIterations = 200;

/// Bisection on phi in (1e-6, pi/2]. Throws NoBracketError when the residual
/// does not change sign on the interval or the root cannot be refined to
/// the residual tolerance.
SectionSolution solve_section(const BladeGeometry& geom, const AirfoilPolar& polar,
                              const FlowCondition& flow, double r);

struct RotorPerformance {
  double thrust = 0.0;  // [N]
  double torque = 0.0;  // [N m]
  double power = 0.0;   // [W]
  double j = 0.0;
  double c_p = 0.0;
  bool converged = false;
};

/// Integrates section loads over the stations. Never throws for a section
/// failure; `converged` is false and the loads are NaN instead.
RotorPerformance solve_rotor(const BladeGeometry& geom, const AirfoilPolar& polar,
                             const FlowCondition& flow);

struct SweepRange {
  double min = 0.0;
  double max = 0.0;
  int steps = 2;
};

struct DatasetRow {
  double v_a = 0.0;
  double omega = 0.0;
  double power = 0.0;
  double j = 0.0;
  double c_p = 0.0;
  bool converged = false;
};

/// Full Cartesian (omega x V) grid, omega outer. Non-converged rows are kept
/// with the flag cleared.
std::vector<DatasetRow> generate_dataset(const BladeGeometry& geom, const AirfoilPolar& polar,
                                         const SweepRange& v_range, const SweepRange& omega_range,
                                         double rho);

}  // namespace propas::bem
