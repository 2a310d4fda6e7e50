#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "altbm/estimation.hpp"
#include "altbm/exp_alternating.hpp"
#include "altbm/map_alternating.hpp"

namespace altbm::cli {

enum class Command { Simulate, Generator, Correlation, Laplace, Converge };

std::string_view command_name(Command c);
std::string_view construction_name(Construction c);

struct ExperimentConfig {
  Command command = Command::Simulate;
  std::uint64_t seed = 1;
  Construction construction = Construction::Standard;
  std::optional<ExpAltParams> exp;
  std::optional<MapParams> map;
  double map_gamma = 0.0;
  std::vector<double> lambdas;
  double horizon = 0.0;
  std::size_t epochs = 0;
  std::vector<double> t_grid;
  std::vector<double> q_grid;
  std::size_t replications = 10000;
  std::size_t workers = 1;
  std::set<std::string> formats{"csv", "json", "svg"};
  int inversion_terms = kDefaultInversionTerms;
  double inversion_tolerance = kDefaultInversionTolerance;
  double empirical_time = 0.0;   // generator: simulate this much phase time for an estimate
  bool independent_pair = false; // generator, standard construction: use the Kronecker sum
  std::string echo;              // effective configuration as canonical JSON
};

// Parses a JSON configuration. `command` (from the command line) wins over
// a "command" field, which must agree if present. `overrides` are
// "key=value" strings applied to top-level fields before validation; the
// value is read as JSON and falls back to a plain string. Throws
// ConfigError or the library's validation errors.
ExperimentConfig parse_config(const std::string& json_text, std::string_view command,
                              const std::vector<std::string>& overrides = {});

// Runs the experiment and writes its files into `out_dir` (created if
// needed). Returns the written file names, manifest.json last.
std::vector<std::string> run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

// Command-line entry point. Exit codes: 0 success, 1 invalid input
// (machine-readable JSON error object on stderr), 2 numerical failure,
// 3 any other failure.
int main(int argc, char** argv);

}  // namespace altbm::cli
