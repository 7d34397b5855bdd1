#pragma once

#include "hdmean_cli/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hdmean::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitUnhealthy = 3 };

struct RunResult {
  std::string csv;
  bool healthy = true;
  std::string problems;  ///< one line per unhealthy run
};

/// Runs every expanded cell and renders the CSV (header comment included).
/// Progress lines go to `log` when non-null.
RunResult run_experiments(const ExperimentFile& file, std::ostream* log = nullptr);

struct RunOptions {
  Command command = Command::Size;
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool quiet = false;
};

/// size / power / diagnose. Returns an ExitCode; diagnostics go to err.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

struct TestOptions {
  std::vector<std::string> data_paths;  ///< one file: one-sample, two: two-sample
  bool header = false;
  std::vector<std::string> methods;     ///< empty: every applicable method
  std::optional<std::string> omega_path;
  double ridge = 1e-3;                  ///< relative to tr(S)/p
  double pe_threshold = 0.0;
  bool json = false;
  /// Skip the data and report the Fisher and min-p combinations of
  /// (p_sum, p_max).
  std::optional<std::pair<double, double>> combine;
};

int cmd_test(const TestOptions& options, std::ostream& out, std::ostream& err);

/// Comma-separated list of method tags.
std::vector<std::string> split_list(const std::string& s);

}  // namespace hdmean::cli
