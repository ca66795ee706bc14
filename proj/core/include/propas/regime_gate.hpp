#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

namespace propas::gate {

/// C_P(J) = c[0] + c[1] J + c[2] J^2 + c[3] J^3
struct CubicFit {
  std::array<double, 4> c{};

  double operator()(double j) const { return c[0] + j * (c[1] + j * (c[2] + j * c[3])); }
  double derivative(double j) const { return c[1] + j * (2.0 * c[2] + j * 3.0 * c[3]); }
};

/// Cubic C_P(J) fit reported for the bundled BEM data of the reference vehicle.
inline constexpr CubicFit kReferenceCubic{{0.074, 0.043, -0.092, -0.059}};

struct JcPoint {
  double j = 0.0;
  double c_p = 0.0;
};

/// Least-squares cubic. Throws RankDeficientError with fewer than four
/// distinct abscissae.
CubicFit fit_cubic(std::span<const JcPoint> points);

/// Positive real roots of dC_P/dJ, ascending, a double root reported once.
std::vector<double> critical_points(const CubicFit& fit);

/// True for samples on the forward-flight branch, J > max(critical points).
/// Every sample passes when there is no critical point.
std::vector<bool> selection_mask(std::span<const double> j, std::span<const double> critical);

enum class GammaSign {
  kLiteral,  // gamma = asin(V_D / |V|)
  kNed,      // gamma = -asin(V_D / |V|), climb positive in NED
};

struct GateConfig {
  double alpha_th_deg = 25.0;
  double v_min = 5.0;  // [m/s]
  GammaSign gamma_sign = GammaSign::kLiteral;
};

void validate(const GateConfig& cfg);

/// Flight path angle from NED earth-frame velocity. Throws ZeroVelocityError
/// for a zero vector.
double flight_path_angle(const Eigen::Vector3d& v_ned, GammaSign sign = GammaSign::kLiteral);

/// alpha = theta - gamma
double angle_of_attack(double theta, const Eigen::Vector3d& v_ned,
                       GammaSign sign = GammaSign::kLiteral);

/// Forward-flight runtime gate: |alpha| below threshold and the airspeed
/// estimate above the low-speed limit. `alpha` is in radians.
bool gate(double alpha, double v_hat, const GateConfig& cfg);

}  // namespace propas::gate
