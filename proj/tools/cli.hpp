#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "gram_spectra/mc.hpp"
#include "gram_spectra/rng.hpp"

namespace gram_spectra::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

std::string version();

enum class ParamKind { integer, real, text, real_list, pair_list };

struct ParamSpec {
  std::string key;        // snake_case in JSON, dashes on the command line
  ParamKind kind;
  nlohmann::json fallback;  // null: required (or, for bounds, required by the chosen eval)
  std::string help;
};

/// Subcommands in display order.
const std::vector<std::string>& subcommands();
/// Throws ValidationError for an unknown subcommand.
const std::vector<ParamSpec>& schema(const std::string& subcommand);

struct ExperimentConfig {
  std::string subcommand;
  nlohmann::json parameters = nlohmann::json::object();
  std::uint64_t seed = rng::kDefaultSeed;
  std::string output_path;  // empty writes to the output stream
  std::string format;       // csv or json; empty picks the subcommand default
  unsigned workers = mc::kAutoWorkers;
  bool allow_censored = false;

  nlohmann::json to_json() const;
  /// Rejects unknown keys, a missing or wrong schema_version and mistyped values.
  static ExperimentConfig from_json(const nlohmann::json& j);
};

/// Fills defaults, checks types and required fields, resolves the format.
ExperimentConfig normalized(ExperimentConfig config);
ExperimentConfig default_config(const std::string& subcommand);
/// Parses a JSON config file. Malformed JSON reports line and column.
ExperimentConfig load_config(const std::string& path);

/// Parses a command-line string into the JSON value for a parameter kind.
nlohmann::json parse_param_value(const ParamSpec& spec, const std::string& text);

/// FNV-1a 64 of the canonical result-determining part of the config
/// (schema_version, subcommand, parameters, seed, format).
std::uint64_t config_hash(const ExperimentConfig& config);

struct RunResult {
  int exit_code = kExitOk;
  std::string content;  // full output file text
  std::string summary;  // one line, no newline
};

/// Computes the output for a normalized config. Throws ValidationError or NumericalError.
RunResult execute(const ExperimentConfig& config);

/// Normalizes, executes, writes atomically (temp file + rename) or to `out`,
/// prints the summary to `err`. Returns the exit code.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point. Precedence: defaults < --config file <
/// GRAM_SPECTRA_SEED < flags.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gram_spectra::cli
