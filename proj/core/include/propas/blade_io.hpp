#pragma once

#include <filesystem>
#include <istream>

#include "propas/bem_rotor.hpp"

namespace propas::bem {

// Geometry file:
//
//   # comment
//   diameter_m = 0.2286
//   hub_radius_m = 0.02
//   blade_count = 2
//   stations
//   # r_m  chord_m  twist_deg
//   0.025  0.0121   44.1
//   ...
//
// Keys may appear in any order before the `stations` marker. Every line after
// it is a station row.
BladeGeometry parse_geometry(std::istream& in);
BladeGeometry load_geometry(const std::filesystem::path& path);

// Polar file: whitespace separated `alpha_deg cl cd` rows, '#' comments.
AirfoilPolar parse_polar(std::istream& in);
AirfoilPolar load_polar(const std::filesystem::path& path);

}  // namespace propas::bem
