#include "crossdiff/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace crossdiff::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const std::string& title, const std::string& x_label, const std::string& y_label) {
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight);
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     kLeft + (kWidth - kLeft - kRight) / 2, escape(title));
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + (kWidth - kLeft - kRight) / 2,
                     kHeight - 12, escape(x_label));
  out += fmt::format("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
                     kTop + (kHeight - kTop - kBottom) / 2, escape(y_label));
  return out;
}

std::string tick(double v) { return fmt::format("{:.3g}", v); }

std::string axes(double x0, double x1, double y0, double y1, bool log_y) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  std::string out = fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                                kLeft, kTop, pw, ph);
  for (int k = 0; k <= 4; ++k) {
    const double fx = k / 4.0;
    const double px = kLeft + fx * pw;
    const double py = kTop + ph - fx * ph;
    const double yv = log_y ? std::pow(10.0, y0 + fx * (y1 - y0)) : y0 + fx * (y1 - y0);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", px, kTop + ph + 16,
                       tick(x0 + fx * (x1 - x0)));
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6, py + 4, tick(yv));
  }
  return out;
}

/// Blue-white-red ramp on [0, 1].
std::string colour(double f) {
  f = std::clamp(f, 0.0, 1.0);
  int r, g, b;
  if (f < 0.5) {
    const double a = f / 0.5;
    r = static_cast<int>(std::lround(59 + a * (255 - 59)));
    g = static_cast<int>(std::lround(76 + a * (255 - 76)));
    b = static_cast<int>(std::lround(192 + a * (255 - 192)));
  } else {
    const double a = (f - 0.5) / 0.5;
    r = static_cast<int>(std::lround(255 + a * (180 - 255)));
    g = static_cast<int>(std::lround(255 + a * (4 - 255)));
    b = static_cast<int>(std::lround(255 + a * (38 - 255)));
  }
  return fmt::format("#{:02x}{:02x}{:02x}", r, g, b);
}

}  // namespace

std::string render(const LinePlot& plot) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (plot.log_y && s.y[i] <= 0.0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  std::string out = header(plot.title, plot.x_label, plot.y_label);
  out += axes(x0, x1, y0, y1, plot.log_y);
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* stroke = kPalette[k % kPalette.size()];
    std::string points;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (plot.log_y && s.y[i] <= 0.0)) continue;
      const double px = kLeft + (s.x[i] - x0) / (x1 - x0) * pw;
      const double py = kTop + ph - (ty(s.y[i]) - y0) / (y1 - y0) * ph;
      points += fmt::format("{:.2f},{:.2f} ", px, py);
    }
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", stroke, points);
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                       kWidth - kRight + 10, ly, kWidth - kRight + 30, stroke);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kWidth - kRight + 36, ly + 4, escape(s.name));
  }
  out += "</svg>\n";
  return out;
}

std::string render(const Heatmap& map) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : map.values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) lo = 0.0, hi = 1.0;
  if (hi == lo) hi = lo + 1.0;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  std::string out = header(map.title, map.x_label, map.y_label);
  if (map.rows > 0 && map.cols > 0) {
    const double cw = pw / map.cols;
    const double ch = ph / map.rows;
    for (int r = 0; r < map.rows; ++r) {
      for (int c = 0; c < map.cols; ++c) {
        const std::size_t k = static_cast<std::size_t>(r * map.cols + c);
        const double v = k < map.values.size() ? map.values[k] : std::numeric_limits<double>::quiet_NaN();
        const std::string fill = std::isfinite(v) ? colour((v - lo) / (hi - lo)) : std::string("#bbbbbb");
        out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                           kLeft + c * cw, kTop + ph - (r + 1) * ch, cw + 0.05, ch + 0.05, fill);
      }
    }
  }
  out += axes(map.x_min, map.x_max, map.y_min, map.y_max, false);
  for (int k = 0; k <= 4; ++k) {
    const double f = k / 4.0;
    const double y = kTop + ph - f * ph;
    if (k < 4) {
      out += fmt::format("<rect x=\"{}\" y=\"{:.2f}\" width=\"16\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                         kWidth - kRight + 20, y - ph / 4, ph / 4, colour(f + 0.125));
    }
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\">{}</text>\n", kWidth - kRight + 42, y + 4, tick(lo + f * (hi - lo)));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace crossdiff::svg
