#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "crossdiff/errors.hpp"
#include "crossdiff/io.hpp"
#include "crossdiff/svg.hpp"

using namespace crossdiff;

TEST_CASE("csv round trip keeps every bit") {
  CsvTable t{{"t", "x", "value"}, {}};
  t.add_row({0.1, -1.0 / 3.0, std::nullopt});
  t.add_row({1e-300, 6.02214076e23, std::nextafter(1.0, 2.0)});
  const std::string text = to_csv(t);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.substr(0, 10) == "t,x,value\n");
  const CsvTable back = parse_csv(text);
  REQUIRE(back.columns == t.columns);
  REQUIRE(back.rows.size() == 2);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      REQUIRE(back.rows[r][c].has_value() == t.rows[r][c].has_value());
      if (t.rows[r][c]) CHECK(*back.rows[r][c] == *t.rows[r][c]);
    }
  }
  CHECK_THROWS_AS(t.add_row({1.0}), DomainError);
}

TEST_CASE("malformed csv is rejected") {
  CHECK_THROWS_AS(parse_csv(""), IOError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n"), IOError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,abc\n"), IOError);
  CHECK_NOTHROW(parse_csv("a,b\r\n1, 2\r\n\r\n"));
}

TEST_CASE("atomic write and initial state from csv") {
  const auto dir = std::filesystem::temp_directory_path() / "crossdiff_io_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "nested" / "init.csv";
  write_atomic(path, "x,u,v\n0.125,1,0\n0.375,2,\n0.625,0,0.5\n0.875,0,0\n");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  const GridSpec g{0.0, 1.0, 4, Boundary::NoFlux};
  const State st = state_from_csv(read_csv(path), g);
  CHECK(st.u[1] == 2.0);
  CHECK(st.v[1] == 0.0);
  CHECK(st.v[2] == 0.5);
  CHECK_THROWS_AS(state_from_csv(read_csv(path), GridSpec{0.0, 1.0, 8, Boundary::NoFlux}), IOError);
  write_atomic(path, "x,u\n0,1\n0,-1\n0,0\n0,0\n");
  CHECK_THROWS_AS(state_from_csv(read_csv(path), g), DomainError);
  CHECK_THROWS_AS(read_text(dir / "missing.csv"), IOError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("snapshot table layout") {
  const GridSpec g{0.0, 1.0, 4, Boundary::NoFlux};
  const std::vector<State> snaps{State{0.0, Field(g, 1.0), Field(g, 2.0)}, State{0.5, Field(g), Field(g)}};
  const CsvTable t = snapshot_table(snaps);
  CHECK(t.columns == std::vector<std::string>{"t", "x", "u", "v", "s"});
  REQUIRE(t.rows.size() == 8);
  CHECK(*t.rows[0][4] == 3.0);
  CHECK(*t.rows[5][0] == 0.5);
}

TEST_CASE("svg output is well formed") {
  svg::LinePlot plot{"title <&>", "x", "y", true, {{"a", {0.0, 1.0, 2.0}, {1.0, 10.0, 100.0}}}};
  const std::string line = svg::render(plot);
  CHECK(line.rfind("<svg", 0) == 0);
  CHECK(line.find("</svg>") != std::string::npos);
  CHECK(line.find("<&>") == std::string::npos);
  CHECK(line.find("&lt;&amp;&gt;") != std::string::npos);

  svg::Heatmap map{"h", "x", "t", 2, 2, 0.0, 1.0, 0.0, 1.0, {0.0, 1.0, NAN, -1.0}};
  const std::string heat = svg::render(map);
  CHECK(heat.rfind("<svg", 0) == 0);
  CHECK(heat.find("</svg>") != std::string::npos);
  CHECK(heat.find("nan") == std::string::npos);
}
