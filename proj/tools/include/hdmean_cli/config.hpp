#pragma once

#include "hdmean/harness.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdmean::cli {

enum class Command { Size, Power, Diagnose };

std::string_view command_name(Command c);

enum class DiagnosticKind { Independence, QfClt, Condition };

std::string_view diagnostic_name(DiagnosticKind k);

/// Bad configuration. what() names the offending field (or line for syntax
/// errors).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// One entry of the "experiments" list. List-valued p / model / error
/// expand to their cartesian product.
struct Experiment {
  std::string name;
  SimConfig base;
  std::vector<std::size_t> p_values;
  std::vector<CovModel> models;
  std::vector<ErrorDist> errors;
  /// Signal support as p^a, resolved per p.
  std::optional<double> m_exponent;

  // power
  std::vector<std::size_t> m_values;
  std::vector<double> sparsity_exponents;

  // diagnose
  DiagnosticKind diagnostic = DiagnosticKind::Independence;
  std::vector<GridPoint> grid;
  /// qf_clt matrix: "a_matrix" (from the model realisation) or "identity".
  std::string qf_matrix = "a_matrix";
};

struct ExperimentFile {
  Command command = Command::Size;
  int schema_version = 1;
  std::vector<Experiment> experiments;
  std::optional<std::string> output;
  /// Normalised JSON after overrides; hashed into every output header.
  nlohmann::json canonical;
};

inline constexpr int kSchemaVersion = 1;

/// One expanded cell of an experiment.
struct Run {
  std::string label;
  SimConfig config;
  const Experiment* experiment = nullptr;
  /// Power only: support sizes and, for sparsity sweeps, the exponent behind
  /// each entry.
  std::vector<std::size_t> m_values;
  std::vector<double> exponents;
};

/// Parses and validates every experiment. Throws ConfigError.
ExperimentFile parse_experiment_file(const nlohmann::json& doc, Command command);

/// Reads a JSON file; syntax errors are reported with line and column.
nlohmann::json read_json_file(const std::string& path);

/// --seed and --threads overrides. The seed is folded into the canonical
/// document; threads are not, since they do not change results.
void apply_overrides(ExperimentFile& file, std::optional<std::uint64_t> seed,
                     std::optional<std::size_t> threads);

/// Cartesian expansion of every experiment, each cell validated.
std::vector<Run> expand(const ExperimentFile& file);

/// FNV-1a (64 bit) of the canonical dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& canonical);

}  // namespace hdmean::cli
