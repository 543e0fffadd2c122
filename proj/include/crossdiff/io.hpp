#pragma once

// CSV tables and atomic file output.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crossdiff/domain.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

/// Column-major-agnostic numeric table; empty cells are written as blanks.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  void add_row(std::vector<std::optional<double>> row);
};

/// Comma separated, '.' decimal, header row, LF line endings, 17 significant digits.
std::string to_csv(const CsvTable& table);
/// Parses a header row plus numeric rows. Throws IOError on malformed input.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_text(const std::filesystem::path& path);

/// Long-format snapshot table: columns t, x, u, v, s.
CsvTable snapshot_table(const std::vector<State>& snapshots);

/// Builds a state from a CSV with columns x, u and optionally v, one row per cell of grid.
State state_from_csv(const CsvTable& table, const GridSpec& grid);

std::string format_number(double x);

}  // namespace crossdiff
