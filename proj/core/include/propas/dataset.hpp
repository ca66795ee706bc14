#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

#include "propas/bem_rotor.hpp"
#include "propas/regime_gate.hpp"

namespace propas::dataset {

extern const char* const kDatasetHeader;

void write_dataset(std::ostream& out, const std::vector<bem::DatasetRow>& rows);
void write_dataset(const std::filesystem::path& path, const std::vector<bem::DatasetRow>& rows);

/// Throws SchemaError on a header mismatch or malformed row.
std::vector<bem::DatasetRow> read_dataset(std::istream& in);
std::vector<bem::DatasetRow> read_dataset(const std::filesystem::path& path);

/// Rows usable for fitting: converged with positive shaft power.
std::vector<bem::DatasetRow> usable_rows(const std::vector<bem::DatasetRow>& rows);

/// Rotor diameter implied by the rows, median of V / (n J); 0 when no row
/// has J > 0.
double infer_diameter(const std::vector<bem::DatasetRow>& rows);

/// Cubic C_P(J) fit of the usable rows, its critical points, and the rows on
/// the forward-flight branch J > J_crit.
struct ForwardBranch {
  gate::CubicFit cubic;
  std::vector<double> critical;
  double j_crit = 0.0;
  std::vector<bem::DatasetRow> rows;
};

ForwardBranch forward_branch(const std::vector<bem::DatasetRow>& rows);

}  // namespace propas::dataset
