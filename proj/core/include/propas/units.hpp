#pragma once

#include <numbers>

namespace propas::units {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double rpm_to_rad_s(double rpm) { return rpm * kTwoPi / 60.0; }
constexpr double rad_s_to_rpm(double omega) { return omega * 60.0 / kTwoPi; }
constexpr double rad_s_to_rev_s(double omega) { return omega / kTwoPi; }
constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace propas::units
