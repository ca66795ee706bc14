#pragma once

#include <filesystem>

#include "propas/blade_io.hpp"

namespace propas::testing {

inline std::filesystem::path data_dir() { return PROPAS_DATA_DIR; }

inline const bem::BladeGeometry& sample_geometry() {
  static const bem::BladeGeometry g = bem::load_geometry(data_dir() / "sample_prop.geom");
  return g;
}

inline const bem::AirfoilPolar& sample_polar() {
  static const bem::AirfoilPolar p = bem::load_polar(data_dir() / "sample_airfoil.polar");
  return p;
}

}  // namespace propas::testing
