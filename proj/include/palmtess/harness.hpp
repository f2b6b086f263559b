#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "palmtess/conductance.hpp"
#include "palmtess/point_process.hpp"

namespace palmtess {

inline constexpr const char* kVersion = "0.1.0";

/// Parsed `key=value` experiment file. Unknown keys are rejected.
struct ExperimentConfig {
  std::string experiment;
  ProcessSpec process = ProcessSpec::poisson(1.0);
  ConductanceLaw law = ConductanceLaw::unit();
  std::map<std::string, std::vector<double>> grids;  // ell, L, gamma, p, R, t0, beta, zeta
  std::uint64_t replicates = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string output_dir = "out";
  std::optional<double> window;  // half-side where an experiment takes one
  std::string quantity = "deg_p";
  std::string route = "both";
  int n_max = 2;
  int lattice_radius = 5;
  std::optional<double> diameter_threshold;
  std::vector<std::pair<std::string, std::string>> echo;  // raw entries in file order

  std::vector<double> grid(const std::string& name, const std::vector<double>& fallback) const;
};

/// Throws config-error carrying the line and column of the offending entry.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Rows of text cells with a fixed header; numbers use the shortest round-trip form.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string fmt(double v);
std::string fmt(std::uint64_t v);
std::string fmt(bool v);
inline std::string fmt(int v) { return std::to_string(v); }

/// Parses a CSV produced by CsvTable (no quoting).
CsvTable read_csv(const std::filesystem::path& path);

std::string sha256_hex(const std::filesystem::path& file);

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // CSV names relative to output_dir
};

/// Output directory after the PALMTESS_OUTPUT_DIR override.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Runs the experiment, writes its CSV files and then run_manifest.json atomically.
RunResult run_experiment(const ExperimentConfig& cfg);
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& output_dir);

enum class PlotKind { loglog_void, phi_vs_p, cluster_cdf, palm_trace };
PlotKind plot_kind_from_string(const std::string& s);

/// Renders a static SVG; throws schema-error listing missing columns.
std::string render_plot(const CsvTable& table, PlotKind kind);
void plot_file(const std::filesystem::path& csv, PlotKind kind, const std::filesystem::path& svg);

struct SelftestReport {
  std::size_t cube_witness_total = 0, cube_witness_pass = 0;
  std::size_t lattice_points = 0, lattice_degree_four = 0;
  std::size_t duality_total = 0, duality_match = 0;
  bool pass() const {
    return cube_witness_pass == cube_witness_total && lattice_degree_four == lattice_points && duality_match == duality_total;
  }
};

/// Deterministic geometry self-test suite: cube-in-ball witnesses in d = 1, 2, 3, lattice degrees and
/// Delaunay adjacency against a brute-force bisector construction.
SelftestReport geometry_selftest(std::uint64_t seed = 1);

}  // namespace palmtess
