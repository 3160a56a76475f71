#pragma once

// Command implementations behind the `genrf` executable. Kept in a library so
// the test suite can drive them directly.

#include "genrf/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace genrf::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitNumerical = 3,
  kExitPartial = 4,  // some scenarios failed, the rest were written
};

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> options;
  std::string tool_version = kToolVersion;
  std::string timestamp;  // UTC, ISO 8601

  /// Embedded in result files. Excludes the timestamp so reruns are
  /// byte-identical.
  std::string reproducible_json() const;
  /// Full manifest, written next to the results.
  std::string full_json() const;
};

std::string utc_timestamp();

struct TestCommand {
  std::string genotype_path;
  std::string phenotype_path;
  std::optional<std::string> covariate_path;
  std::optional<std::string> weights_path;
  std::vector<Method> methods = {Method::kGenRF};
  std::optional<std::string> output_path;  // stdout when absent
  double alpha = 0.05;
  bool impute_missing = false;
};

/// Writes one record per method (TSV, or JSON lines for .json/.jsonl paths).
/// Nothing is written when inputs fail validation.
int cmd_test(const TestCommand& cmd, std::ostream& out, std::ostream& err);

struct SimulateCommand {
  std::string scenario_path;
  std::string output_dir;
  int threads = 1;
  std::optional<std::uint64_t> seed;  // overrides every scenario's seed
  std::optional<double> alpha;        // overrides every scenario's alpha
  std::optional<std::vector<Method>> methods;
};

/// Runs each scenario, writing <name>.tsv and <name>.json into output_dir,
/// plus run_manifest.json. Prints a summary grid when scenarios share a sweep.
int cmd_simulate(const SimulateCommand& cmd, std::ostream& out, std::ostream& err);

int cmd_quadform(const std::vector<double>& lambdas, double x, std::ostream& out,
                 std::ostream& err);

std::vector<Method> parse_method_list(const std::string& csv);

}  // namespace genrf::cli
