#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "crossdiff/continuation.hpp"

namespace crossdiff::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kNumericalFailure = 2, kConfigError = 3 };

struct CommandOptions {
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
  std::vector<std::string> formats;  ///< replaces the configured formats when non-empty
};

int cmd_run(const std::filesystem::path& config, const CommandOptions& options, std::ostream& log);
int cmd_sweep(const std::filesystem::path& config, const CommandOptions& options, std::ostream& log);
int cmd_diagnose(const std::filesystem::path& config, const CommandOptions& options, std::ostream& log);
int cmd_oracle_check(const std::filesystem::path& config, const CommandOptions& options, std::ostream& log);

/// Ladder table of a sweep as written to sweep_report.json.
nlohmann::json sweep_report_json(const SweepReport& report);

}  // namespace crossdiff::cli
