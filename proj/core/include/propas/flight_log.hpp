#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace propas::log {

/// One telemetry row in SI units.
struct FlightRecord {
  double t = 0.0;                 // [s]
  double voltage = 0.0;           // [V]
  double current = 0.0;           // [A]
  double omega = 0.0;             // [rad/s]
  std::optional<double> v_pitot;  // [m/s]
  std::optional<double> omega_x;  // body roll rate [rad/s]
  double theta = 0.0;             // pitch [rad]
  double psi = 0.0;               // yaw [rad]
  double v_n = 0.0;               // [m/s]
  double v_e = 0.0;
  double v_d = 0.0;
  std::optional<double> rho;  // [kg/m^3]
};

enum class OmegaUnit { kRadPerSec, kRpm };
enum class AngleUnit { kRad, kDeg };

/// Throws UnitUnknownError.
OmegaUnit parse_omega_unit(const std::string& text);
AngleUnit parse_angle_unit(const std::string& text);

/// Declared units of a foreign log and optional column renames.
///
/// With rpm the rotor speed column is `omega_rpm`; with degrees the angle
/// columns are `theta_deg`, `psi_deg` and `omega_x_deg_s`. `aliases` maps
/// any of those expected names to the name used in the file.
struct UnitConfig {
  OmegaUnit omega = OmegaUnit::kRadPerSec;
  AngleUnit angle = AngleUnit::kRad;
  std::map<std::string, std::string> aliases;
};

struct IngestResult {
  std::vector<FlightRecord> records;
  std::size_t rows_read = 0;
  std::size_t dropped_nonfinite = 0;
  std::size_t dropped_negative_omega = 0;
};

/// Parses a flight CSV. Throws SchemaError for a missing required column or
/// timestamps that do not increase.
IngestResult ingest_flight_csv(std::istream& in, const UnitConfig& units = {});
IngestResult ingest_flight_csv(const std::filesystem::path& path, const UnitConfig& units = {});

/// Canonical header, SI units.
extern const char* const kFlightHeader;

/// Writes the canonical schema with round-trip exact numbers.
void write_flight_csv(std::ostream& out, const std::vector<FlightRecord>& records);
void write_flight_csv(const std::filesystem::path& path, const std::vector<FlightRecord>& records);

/// Centered moving average of voltage, current and omega. A window of 0 or
/// 1 leaves the records unchanged.
void smooth(std::vector<FlightRecord>& records, std::size_t window);

}  // namespace propas::log
