#include "crossdiff/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_cell(const std::string& raw, std::size_t line_no) {
  const std::string cell = trim(raw);
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw IOError(fmt::format("line {}: '{}' is not a number", line_no, cell));
  }
  return value;
}

}  // namespace

void CsvTable::add_row(std::vector<std::optional<double>> row) {
  if (row.size() != columns.size()) {
    throw DomainError(fmt::format("row has {} cells, table has {} columns", row.size(), columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      if (row[c]) out += format_number(*row[c]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable table;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (table.columns.empty()) {
      for (const auto& c : cells) table.columns.push_back(trim(c));
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw IOError(fmt::format("line {}: expected {} cells, found {}", line_no, table.columns.size(), cells.size()));
    }
    std::vector<std::optional<double>> row;
    for (const auto& c : cells) row.push_back(parse_cell(c, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw IOError("CSV has no header row");
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError(fmt::format("cannot write '{}'", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IOError(fmt::format("write to '{}' failed", tmp.string()));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IOError(fmt::format("cannot rename '{}' to '{}': {}", tmp.string(), path.string(), ec.message()));
}

CsvTable snapshot_table(const std::vector<State>& snapshots) {
  CsvTable table{{"t", "x", "u", "v", "s"}, {}};
  for (const State& st : snapshots) {
    const GridSpec& g = st.grid();
    for (int i = 0; i < g.n_cells; ++i) {
      const double u = st.u[static_cast<std::size_t>(i)];
      const double v = st.v[static_cast<std::size_t>(i)];
      table.rows.push_back({st.t, g.x(i), u, v, u + v});
    }
  }
  return table;
}

State state_from_csv(const CsvTable& table, const GridSpec& grid) {
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (table.columns[c] == name) return c;
    }
    return std::nullopt;
  };
  const auto cu = column("u");
  const auto cv = column("v");
  if (!cu) throw IOError("initial CSV needs a 'u' column");
  if (table.rows.size() != grid.size()) {
    throw IOError(fmt::format("initial CSV has {} rows, grid has {} cells", table.rows.size(), grid.n_cells));
  }
  State st{0.0, Field(grid), Field(grid)};
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    st.u[i] = table.rows[i][*cu].value_or(0.0);
    if (cv) st.v[i] = table.rows[i][*cv].value_or(0.0);
  }
  st.validate();
  return st;
}

}  // namespace crossdiff
