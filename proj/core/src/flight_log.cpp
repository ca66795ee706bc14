#include "propas/flight_log.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "csv.hpp"
#include "propas/atomic_file.hpp"
#include "propas/errors.hpp"
#include "propas/units.hpp"

namespace propas::log {

const char* const kFlightHeader =
    "t_s,voltage_v,current_a,omega_rad_s,v_pitot_mps,omega_x_rad_s,theta_rad,psi_rad,v_n_mps,"
    "v_e_mps,v_d_mps,rho_kg_m3";

OmegaUnit parse_omega_unit(const std::string& text) {
  if (text == "rad_s" || text == "rad/s") return OmegaUnit::kRadPerSec;
  if (text == "rpm") return OmegaUnit::kRpm;
  throw UnitUnknownError("unknown rotational speed unit '" + text + "' (rad_s or rpm)");
}

AngleUnit parse_angle_unit(const std::string& text) {
  if (text == "rad") return AngleUnit::kRad;
  if (text == "deg") return AngleUnit::kDeg;
  throw UnitUnknownError("unknown angle unit '" + text + "' (rad or deg)");
}

namespace {

enum Field {
  kT,
  kVoltage,
  kCurrent,
  kOmega,
  kPitot,
  kRollRate,
  kTheta,
  kPsi,
  kVn,
  kVe,
  kVd,
  kRho,
  kFieldCount
};

struct Column {
  Field field;
  std::string name;
  bool required;
};

std::vector<Column> expected_columns(const UnitConfig& u) {
  const bool deg = u.angle == AngleUnit::kDeg;
  std::vector<Column> cols = {
      {kT, "t_s", true},
      {kVoltage, "voltage_v", true},
      {kCurrent, "current_a", true},
      {kOmega, u.omega == OmegaUnit::kRpm ? "omega_rpm" : "omega_rad_s", true},
      {kPitot, "v_pitot_mps", false},
      {kRollRate, deg ? "omega_x_deg_s" : "omega_x_rad_s", false},
      {kTheta, deg ? "theta_deg" : "theta_rad", true},
      {kPsi, deg ? "psi_deg" : "psi_rad", true},
      {kVn, "v_n_mps", true},
      {kVe, "v_e_mps", true},
      {kVd, "v_d_mps", true},
      {kRho, "rho_kg_m3", false},
  };
  for (auto& c : cols) {
    if (auto it = u.aliases.find(c.name); it != u.aliases.end()) c.name = it->second;
  }
  return cols;
}

}  // namespace

IngestResult ingest_flight_csv(std::istream& in, const UnitConfig& units) {
  IngestResult result;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("flight log: missing header");

  std::unordered_map<std::string, std::size_t> header;
  {
    const auto names = csv::split(line);
    for (std::size_t i = 0; i < names.size(); ++i) header.emplace(std::string(names[i]), i);
  }
  const auto columns = expected_columns(units);
  std::array<std::optional<std::size_t>, kFieldCount> index{};
  for (const auto& c : columns) {
    if (auto it = header.find(c.name); it != header.end()) {
      index[c.field] = it->second;
    } else if (c.required) {
      throw SchemaError("flight log: missing required column '" + c.name + "'");
    }
  }

  auto to_rad_s = [&](double w) {
    return units.omega == OmegaUnit::kRpm ? units::rpm_to_rad_s(w) : w;
  };
  auto to_rad = [&](double a) { return units.angle == AngleUnit::kDeg ? units::deg_to_rad(a) : a; };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    ++result.rows_read;
    const auto fields = csv::split(line);
    auto get = [&](Field f) -> std::optional<double> {
      if (!index[f] || *index[f] >= fields.size()) return std::nullopt;
      return csv::parse_field(fields[*index[f]]);
    };

    std::array<std::optional<double>, kFieldCount> v{};
    for (int f = 0; f < kFieldCount; ++f) v[f] = get(static_cast<Field>(f));

    bool finite = true;
    for (const auto& c : columns) {
      if (c.required && !(v[c.field] && std::isfinite(*v[c.field]))) finite = false;
      if (!c.required && v[c.field] && !std::isfinite(*v[c.field])) finite = false;
    }
    if (!finite) {
      ++result.dropped_nonfinite;
      continue;
    }

    FlightRecord r;
    r.t = *v[kT];
    r.voltage = *v[kVoltage];
    r.current = *v[kCurrent];
    r.omega = to_rad_s(*v[kOmega]);
    r.v_pitot = v[kPitot];
    if (v[kRollRate]) r.omega_x = to_rad(*v[kRollRate]);
    r.theta = to_rad(*v[kTheta]);
    r.psi = to_rad(*v[kPsi]);
    r.v_n = *v[kVn];
    r.v_e = *v[kVe];
    r.v_d = *v[kVd];
    r.rho = v[kRho];

    if (r.omega < 0.0) {
      ++result.dropped_negative_omega;
      continue;
    }
    if (!result.records.empty() && !(r.t > result.records.back().t)) {
      throw SchemaError("flight log: timestamps not strictly increasing at line " +
                        std::to_string(line_no));
    }
    result.records.push_back(r);
  }
  return result;
}

IngestResult ingest_flight_csv(const std::filesystem::path& path, const UnitConfig& units) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open flight log " + path.string());
  return ingest_flight_csv(in, units);
}

void write_flight_csv(std::ostream& out, const std::vector<FlightRecord>& records) {
  out << kFlightHeader << '\n';
  for (const auto& r : records) {
    out << csv::format(r.t) << ',' << csv::format(r.voltage) << ',' << csv::format(r.current) << ','
        << csv::format(r.omega) << ',' << csv::format(r.v_pitot) << ',' << csv::format(r.omega_x)
        << ',' << csv::format(r.theta) << ',' << csv::format(r.psi) << ',' << csv::format(r.v_n)
        << ',' << csv::format(r.v_e) << ',' << csv::format(r.v_d) << ',' << csv::format(r.rho)
        << '\n';
  }
}

void write_flight_csv(const std::filesystem::path& path, const std::vector<FlightRecord>& records) {
  write_atomically(path, [&](std::ostream& out) { write_flight_csv(out, records); });
}

void smooth(std::vector<FlightRecord>& records, std::size_t window) {
  if (window <= 1 || records.empty()) return;
  const std::size_t n = records.size();
  const std::size_t half = window / 2;
  std::vector<double> volt(n), amp(n), omega(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + (window - 1 - half));
    double sv = 0.0, si = 0.0, sw = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
      sv += records[k].voltage;
      si += records[k].current;
      sw += records[k].omega;
    }
    const double count = static_cast<double>(hi - lo + 1);
    volt[i] = sv / count;
    amp[i] = si / count;
    omega[i] = sw / count;
  }
  for (std::size_t i = 0; i < n; ++i) {
    records[i].voltage = volt[i];
    records[i].current = amp[i];
    records[i].omega = omega[i];
  }
}

}  // namespace propas::log
