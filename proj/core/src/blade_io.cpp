#include "propas/blade_io.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "propas/errors.hpp"
#include "propas/units.hpp"

namespace propas::bem {

namespace {

std::string strip(const std::string& line) {
  std::string s = line.substr(0, line.find('#'));
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<double> parse_numbers(const std::string& line, std::size_t expected, int line_no) {
  std::istringstream is(line);
  std::vector<double> out;
  double v = 0.0;
  while (is >> v) out.push_back(v);
  if (!is.eof() || out.size() != expected) {
    throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                      " numeric columns");
  }
  return out;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  return in;
}

}  // namespace

BladeGeometry parse_geometry(std::istream& in) {
  std::map<std::string, double> keys;
  std::vector<BladeStation> stations;
  bool in_table = false;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip(raw);
    if (line.empty()) continue;
    if (!in_table) {
      if (line == "stations" || line == "[stations]") {
        in_table = true;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw SchemaError("line " + std::to_string(line_no) + ": expected key = value");
      }
      const std::string key = strip(line.substr(0, eq));
      try {
        keys[key] = std::stod(line.substr(eq + 1));
      } catch (const std::exception&) {
        throw SchemaError("line " + std::to_string(line_no) + ": bad value for " + key);
      }
      continue;
    }
    const auto v = parse_numbers(line, 3, line_no);
    stations.push_back({v[0], v[1], units::deg_to_rad(v[2])});
  }

  for (const char* required : {"diameter_m", "hub_radius_m", "blade_count"}) {
    if (!keys.contains(required))
      throw SchemaError(std::string("geometry: missing key ") + required);
  }
  if (stations.empty()) throw SchemaError("geometry: missing stations table");
  try {
    return BladeGeometry(std::move(stations), keys.at("hub_radius_m"), keys.at("diameter_m"),
                         static_cast<int>(keys.at("blade_count")));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("geometry: ") + e.what());
  }
}

BladeGeometry load_geometry(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_geometry(in);
}

AirfoilPolar parse_polar(std::istream& in) {
  std::vector<double> alpha, cl, cd;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip(raw);
    if (line.empty()) continue;
    const auto v = parse_numbers(line, 3, line_no);
    alpha.push_back(units::deg_to_rad(v[0]));
    cl.push_back(v[1]);
    cd.push_back(v[2]);
  }
  try {
    return AirfoilPolar(std::move(alpha), std::move(cl), std::move(cd));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("polar: ") + e.what());
  }
}

AirfoilPolar load_polar(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_polar(in);
}

}  // namespace propas::bem
