#include "propas/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "csv.hpp"
#include "propas/atomic_file.hpp"
#include "propas/errors.hpp"
#include "propas/units.hpp"

namespace propas::dataset {

const char* const kDatasetHeader = "v_a,omega_rad_s,power_w,j,c_p,converged";

void write_dataset(std::ostream& out, const std::vector<bem::DatasetRow>& rows) {
  out << kDatasetHeader << '\n';
  for (const auto& r : rows) {
    out << csv::format(r.v_a) << ',' << csv::format(r.omega) << ',' << csv::format(r.power) << ','
        << csv::format(r.j) << ',' << csv::format(r.c_p) << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const std::vector<bem::DatasetRow>& rows) {
  write_atomically(path, [&](std::ostream& out) { write_dataset(out, rows); });
}

std::vector<bem::DatasetRow> read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::trim(line) != kDatasetHeader) {
    throw SchemaError(std::string("dataset: expected header '") + kDatasetHeader + "'");
  }
  std::vector<bem::DatasetRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 6)
      throw SchemaError("dataset: line " + std::to_string(line_no) + " needs 6 fields");
    std::array<double, 6> v{};
    for (std::size_t i = 0; i < 6; ++i) {
      const auto parsed = csv::parse_field(f[i]);
      if (!parsed) throw SchemaError("dataset: empty field on line " + std::to_string(line_no));
      v[i] = *parsed;
    }
    rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5] != 0.0});
  }
  return rows;
}

std::vector<bem::DatasetRow> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open dataset " + path.string());
  return read_dataset(in);
}

std::vector<bem::DatasetRow> usable_rows(const std::vector<bem::DatasetRow>& rows) {
  std::vector<bem::DatasetRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), [](const bem::DatasetRow& r) {
    return r.converged && r.power > 0.0 && r.omega > 0.0 && std::isfinite(r.c_p) &&
           std::isfinite(r.j);
  });
  return out;
}

double infer_diameter(const std::vector<bem::DatasetRow>& rows) {
  std::vector<double> d;
  for (const auto& r : rows) {
    if (r.j > 0.0 && r.omega > 0.0 && r.v_a > 0.0) {
      d.push_back(r.v_a / (units::rad_s_to_rev_s(r.omega) * r.j));
    }
  }
  if (d.empty()) return 0.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

ForwardBranch forward_branch(const std::vector<bem::DatasetRow>& rows) {
  const auto usable = usable_rows(rows);
  std::vector<gate::JcPoint> points;
  points.reserve(usable.size());
  for (const auto& r : usable) points.push_back({r.j, r.c_p});

  ForwardBranch out;
  out.cubic = gate::fit_cubic(points);
  out.critical = gate::critical_points(out.cubic);
  out.j_crit = out.critical.empty() ? 0.0 : out.critical.back();
  for (const auto& r : usable) {
    if (r.j > out.j_crit) out.rows.push_back(r);
  }
  return out;
}

}  // namespace propas::dataset
