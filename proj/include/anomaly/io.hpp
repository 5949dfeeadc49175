#pragma once

// JSON and CSV exchange formats: structure constants, metrics, forms,
// reports, scenario and sweep files, trajectory tables.

#include "anomaly/algebra.hpp"
#include "anomaly/analysis.hpp"
#include "anomaly/curvature.hpp"
#include "anomaly/flow.hpp"
#include "anomaly/geometry.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace anomaly::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// {"kind": name (catalog entries only), "entries": [{d, a, b, re, im}, ...]}
/// with 1-based indices. Only entries with a < b are written.
json structure_constants_to_json(const StructureConstants& c);

/// Accepts a catalog name string or the object form. An entry whose swapped
/// partner (d, b, a) is absent gets it filled in antisymmetrically. Rejects
/// symmetric parts above 1e-12 and Jacobi residuals above 1e-10.
StructureConstants structure_constants_from_json(const json& j, const std::string& where = "");

/// 3x3 array of {re, im}; a plain number stands for a real entry.
json matrix_to_json(const Matrix3c& m);
json metric_to_json(const HermitianMetric& g);
HermitianMetric metric_from_json(const json& j, const std::string& where = "");

/// {"entries": [{a, b, c, d, re, im}, ...]} over the nonzero coefficients, 1-based.
json four_form_to_json(const FourForm22& f, double drop_below = 0.0);

json complex_to_json(Complex z);
json stationary_report_to_json(const StationaryReport& r);
json spectrum_report_to_json(const SpectrumReport& r);

struct OutputSpec {
  std::string csv_path;
  std::string json_path;
  std::size_t sample_stride = 1;
};

struct Scenario {
  std::string name;
  StructureConstants constants = catalog(GroupKind::Abelian);
  std::optional<GroupKind> kind;
  HermitianMetric initial_metric = HermitianMetric::identity();
  double kappa = 1.0;
  double alpha_prime = 1.0;
  IntegratorConfig integrator;
  NewtonOptions newton;
  OutputSpec outputs;

  ConnectionParams params() const { return ConnectionParams(kappa, alpha_prime); }
};

/// Unknown keys and type mismatches are reported as InvalidConfig with the
/// JSON pointer of the offending field.
Scenario parse_scenario(const json& j, const std::string& where = "");

/// Reads and parses a JSON document; syntax errors report line and column.
json read_json_file(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

struct SweepCell {
  std::size_t index = 0;
  /// Axis values that define the cell, in column order.
  std::vector<std::pair<std::string, double>> coordinates;
  std::optional<Scenario> scenario;
  std::string error;
};

struct Sweep {
  std::string name;
  Scenario base;
  std::string csv_path;
  std::vector<SweepCell> cells;
  std::vector<std::string> axis_columns;
};

/// {"schema_version": 1, "name": ..., "base": <scenario body>, "grid": {...},
///  "outputs": {"csv_path": ...}}. Grid axes: initial_diagonals (list of
/// triples), isotropic_multiples (lambda(0) = m * 2 beta), kappa, alpha_prime,
/// beta (alpha_prime = 4 beta / tau). Cells are the Cartesian product. A cell
/// whose parameters are invalid keeps the error instead of a scenario.
Sweep parse_sweep(const json& j);
Sweep load_sweep(const std::filesystem::path& path);

/// Shortest round-trip decimal form.
std::string format_double(double x);

std::vector<std::string> trajectory_columns(const Trajectory& traj);
/// Header row then every sample_stride-th sample; the final sample is always written.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, std::size_t sample_stride = 1);

/// Termination, final state, monitor drift statistics and step statistics.
json run_summary(const Scenario& scenario, const Trajectory& traj, double wall_seconds);

}  // namespace anomaly::io
