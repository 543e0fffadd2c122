#pragma once

// Run configuration: JSON schema, validation and canonical form.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crossdiff/balance.hpp"
#include "crossdiff/continuation.hpp"
#include "crossdiff/domain.hpp"
#include "crossdiff/io.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/oracle.hpp"
#include "crossdiff/solver.hpp"
#include "crossdiff/test_functions.hpp"

namespace crossdiff::cli {

enum class InitialPreset { Zero, Box, Gaussian, Barenblatt, TwoBumpMixed, Csv };

struct InitialSpec {
  InitialPreset preset = InitialPreset::TwoBumpMixed;
  double t0 = 0.0;
  std::string species = "u";  ///< box and gaussian: "u", "v" or "both"
  double height = 1.0;
  double center = 0.0;
  double half_width = 0.5;
  double mass = 1.0;
  double sigma = 0.25;
  double offset = 0.25;  ///< two_bump_mixed: bumps centred at -offset (u) and +offset (v)
  std::string file;
  CsvTable table;  ///< contents of file, loaded during parsing

  /// The initial state on a grid; the alpha is needed by the Barenblatt preset.
  State build(const GridSpec& grid, double alpha) const;
};

struct SweepConfig {
  std::vector<double> eps_ladder;
  std::vector<int> grid_ladder;
  int snapshots = 200;
  CoarseWindow coarse;
  MaskTolerances mask;
};

struct DiagnoseConfig {
  std::vector<TestFunction> test_functions;
  std::vector<LawSpec> laws;
};

struct OutputConfig {
  std::filesystem::path directory = "out";
  bool csv = true;
  bool json = true;
  bool svg = true;
};

struct RunConfig {
  GridSpec grid;
  std::string model_preset = "demo";
  ModelSpec model;
  InitialSpec initial;
  SolverParams solver;
  std::optional<SweepConfig> sweep;
  std::optional<ExactSolution> oracle;
  DiagnoseConfig diagnose;
  OutputConfig outputs;
};

/// Reads and validates a config file. Throws IOError, SchemaError listing every violation.
RunConfig parse_config(const std::filesystem::path& path);
/// Relative file references resolve against base_dir.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");

/// Fully resolved config with defaults filled in and outputs omitted; stable key order.
nlohmann::json canonical_json(const RunConfig& config);
/// SHA-256 of canonical_json(config).dump(), hex encoded.
std::string config_hash(const RunConfig& config);

/// The published schema as a JSON Schema document.
nlohmann::json config_schema();

}  // namespace crossdiff::cli
