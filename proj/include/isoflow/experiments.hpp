#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "isoflow/flow_simulator.hpp"

namespace isoflow {

enum class Mode { simulate, exact_density, gue_source, validate, phase_diagram };
enum class OutputFormat { csv, json };

Mode parse_mode(std::string_view name);
std::string_view to_string(Mode mode) noexcept;

/// Phase-scan grid; both axes include their end points.
struct PhaseGrid {
  double tau_min = -0.9;
  double tau_max = 0.9;
  int tau_points = 21;
  double mu_min = 0.0;
  double mu_max = 1.0;
  int mu_points = 21;
};

struct ExperimentConfig {
  Mode mode = Mode::simulate;
  FlowParams flow{EnsembleParams{2, 2, 0.0}, 1.0, 0.0};
  double t_final = 1.0;
  std::int64_t n_steps = 1000;
  std::int64_t n_trajectories = 1000;
  Scheme scheme = Scheme::ito;
  /// 0 selects the default cadence.
  std::int64_t qr_period = 0;
  std::vector<double> checkpoints;
  PhaseGrid grid;
  std::optional<std::uint64_t> seed;
  /// Output stem; a trailing .csv/.json is stripped.
  std::string out = "isoflow_out";
  OutputFormat format = OutputFormat::csv;
  /// Worker threads (0 = hardware concurrency). Outputs do not depend on it.
  unsigned threads = 1;
  int histogram_bins = 40;
  int density_points = 201;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Applies the keys of a JSON object (same names as the long flags, e.g.
/// "t-final", "qr-period") on top of `base`. Unknown keys are errors.
ExperimentConfig apply_json(const std::string& json_text, ExperimentConfig base);

/// Parses command-line flags; `--config <path>` is read first and explicit
/// flags override it. Throws ConfigError on malformed input. Returns
/// nullopt when only help was requested (the help text goes to stdout).
std::optional<ExperimentConfig> parse_command_line(int argc, const char* const* argv);

/// Tabular artifact with canonical row order.
struct Table {
  using Cell = std::variant<std::int64_t, double, std::string>;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// CSV uses shortest round-trip number formatting; JSON is
/// {"columns": [...], "rows": [[...], ...]}.
std::string render(const Table& table, OutputFormat format);

struct RunReport {
  int exit_code = 0;
  std::vector<std::string> files;
  std::vector<std::string> messages;
};

/// Executes one experiment and writes its artifacts. Exit codes: 0 success,
/// 1 validation failure, 2 configuration error.
RunReport run(const ExperimentConfig& config);

/// Full CLI entry point (parse, run, print summary).
int cli_main(int argc, const char* const* argv);

} // namespace isoflow
