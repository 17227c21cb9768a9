#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dirpart/continuum.hpp"
#include "dirpart/domain.hpp"
#include "dirpart/kernels.hpp"
#include "dirpart/partitioner.hpp"
#include "dirpart/transport.hpp"

namespace dirpart {

inline constexpr int kReportSchemaVersion = 1;

enum class ReferenceKind { kAuto, kInterval, kGrid, kNone };

ReferenceKind parse_reference(const std::string& name);  // auto | interval | grid | none
std::string reference_name(ReferenceKind kind);

struct ExperimentConfig {
  std::string name = "sweep";
  Domain inner = Domain::interval(0.0, 1.0);
  /// Sampling domain. Unset: U itself in Zaremba mode, the 0.3-margin box otherwise.
  std::optional<Domain> outer;
  KernelKind kernel = KernelKind::kExponential;
  double eps_c = 1.0;
  double eps_alpha = 0.3;
  std::vector<std::size_t> n_list;
  std::size_t k = 1;
  PartitionMode mode = PartitionMode::kDirichlet;
  LaplacianKind laplacian = LaplacianKind::kUnnormalized;
  std::size_t restarts = 20;
  std::size_t max_iterations = 300;
  std::vector<std::uint64_t> seeds{0};
  ReferenceKind reference = ReferenceKind::kAuto;
  std::size_t grid_n = 200;            // grid reference resolution
  std::size_t grid_restarts = 20;
  std::size_t reference_points = 1024;  // size of the discretised continuum pair
  std::string cache_dir = ".dirpart-cache";
  std::string output_dir = ".";
  std::size_t entropic_above = 2000;   // TL2 switches to the entropic solver above this support size
  double hausdorff_delta = 0.0;        // 0: diameter / 256
  bool compute_tl2 = true;
  bool record_timing = false;
  std::size_t workers = 1;

  SamplingSpace space() const;
  EpsilonRule epsilon_rule() const { return {eps_c, eps_alpha, inner.dim()}; }
  SolverConfig solver(std::uint64_t seed) const;
};

/// JSON config; unknown keys and bad values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

/// Domain from a JSON object such as {"type": "disk", "center": [0, 0], "radius": 1}.
Domain parse_domain(const std::string& json_text);

struct RunRecord {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double objective = 0.0;
  std::vector<double> lambda;     // per part, after label matching
  std::vector<double> hausdorff;  // per part, to the matched reference part
  double tl2 = 0.0;
  double sup_dev = 0.0;
  double wall_ms = 0.0;
  bool tl2_approximate = false;
  std::string error;  // empty on success
};

struct RunReport {
  int schema_version = kReportSchemaVersion;
  std::string name;
  std::size_t k = 1;
  bool admissible = true;
  std::string admissibility;
  std::string reference;
  double hausdorff_accuracy = 0.0;
  std::vector<RunRecord> records;

  std::size_t failures() const;
};

/// Continuum partition the sweep compares against.
struct ContinuumReference {
  std::size_t k = 0;
  std::vector<PointCloud> parts;
  double accuracy = 0.0;
  double objective = 0.0;
  /// Discretised continuum ground state on the sampling domain, or empty.
  std::optional<EmpiricalPair> ground_state;
};

/// Closed-form interval reference (d = 1).
ContinuumReference interval_reference(const ExperimentConfig& config);

/// Grid reference on the bounding box of U, loaded from or stored in the
/// content-hashed cache under config.cache_dir.
ContinuumReference grid_reference(const ExperimentConfig& config);

/// Hash naming the cached grid reference for this config.
std::string grid_reference_key(const ExperimentConfig& config);

/// One record per (n, seed), sorted by (n, seed). Per-cell errors are stored
/// in the record and the sweep continues.
RunReport run_sweep(const ExperimentConfig& config);

struct EnergyRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double eps = 0.0;
  double discrete = 0.0;
  double continuum = 0.0;  // sigma_eta * E(u)
  double ratio = 0.0;
  std::string error;
};

/// Named test fields: "sin" (sin(pi x1)), "const", "bumps" (two disjoint bumps).
ScalarField test_field(const std::string& name);

std::vector<EnergyRow> run_energy_convergence(const ExperimentConfig& config, const ScalarField& u);

/// Median ratio per n, in n order.
std::vector<std::pair<std::size_t, double>> median_ratio(const std::vector<EnergyRow>& rows);

void write_energy_table(std::ostream& os, const std::vector<EnergyRow>& rows);

enum class ReportFormat { kCsv, kText };

/// n, seed, objective, lambda_1..k, hausdorff_1..k, tl2, sup_dev, wall_ms, tl2_approximate.
void emit_report(std::ostream& os, const RunReport& report, ReportFormat format);
/// Writes <dir>/<name>.csv and <dir>/<name>.txt; throws std::runtime_error on I/O failure.
void emit_report_files(const RunReport& report, const std::string& dir);
std::vector<std::string> csv_header(std::size_t k);
RunReport parse_csv(std::istream& is);

}  // namespace dirpart
