#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emwf/scenario.hpp"

namespace emwf {

struct RunOptions {
  // Overrides the scenario's output directory.
  std::optional<std::filesystem::path> out;
  unsigned threads = 1;
  // Overrides the scenario seed.
  std::optional<std::uint64_t> seed;
  // Multiplies the classifier tolerances and every numeric expectation.
  double tol_scale = 1.0;
};

enum class StageStatus { pass, fail, skip, error };
std::string to_string(StageStatus s);

struct StageResult {
  std::string name;
  StageStatus status = StageStatus::skip;
  std::string reason;
  // Indented detail lines for report.txt.
  std::vector<std::string> details;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnalysisError = 1;
inline constexpr int kExitValidation = 2;

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path directory;
  std::vector<StageResult> stages;
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;
};

// Runs into `<dir>.partial` and renames it to `<dir>` once the manifest is
// written; an earlier run directory at `<dir>` is replaced. The exit code is
// kExitAnalysisError iff a stage errored.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

// sha256 and relative path of every file under `dir`, sorted by path.
std::vector<std::pair<std::string, std::string>> manifest_entries(const std::filesystem::path& dir);

}  // namespace emwf
