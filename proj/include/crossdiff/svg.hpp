#pragma once

// Minimal SVG emitters for line plots and heatmaps.

#include <string>
#include <vector>

namespace crossdiff::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

/// values are row-major with `rows` rows (y, bottom to top) and `cols` columns (x).
struct Heatmap {
  std::string title;
  std::string x_label;
  std::string y_label;
  int rows = 0;
  int cols = 0;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  std::vector<double> values;  ///< NaN cells are drawn grey
};

std::string render(const LinePlot& plot);
std::string render(const Heatmap& map);

}  // namespace crossdiff::svg
