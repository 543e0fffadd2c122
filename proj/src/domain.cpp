#include "crossdiff/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

void GridSpec::validate() const {
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw DomainError(fmt::format("grid requires x_max > x_min (got [{}, {}])", x_min, x_max));
  }
  if (n_cells < 4) throw DomainError(fmt::format("grid requires n_cells >= 4 (got {})", n_cells));
}

Field::Field(const GridSpec& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DomainError(fmt::format("field has {} values for a grid of {} cells", values_.size(), grid_.n_cells));
  }
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double Field::max() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }
double Field::min() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }

Field& Field::operator+=(const Field& other) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double a) {
  for (double& x : values_) x *= a;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field f) { return f *= a; }

void State::validate() const {
  if (!(u.grid() == v.grid())) throw DomainError("state species live on different grids");
  if (u.size() != u.grid().size() || v.size() != v.grid().size()) throw DomainError("state field length mismatch");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(v[i])) throw DomainError(fmt::format("non-finite density in cell {}", i));
    if (u[i] < 0.0 || v[i] < 0.0) throw DomainError(fmt::format("negative density in cell {}", i));
  }
}

double boundary_ratio(const Field& f) {
  double peak = 0.0;
  for (double x : f.values()) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(f[0]), std::abs(f[f.size() - 1])) / peak;
}

double integrate(const Field& f) {
  double sum = 0.0;
  for (double x : f.values()) sum += x;
  return f.grid().dx() * sum;
}

double moment(const Field& f, MomentWeight weight) {
  const GridSpec& g = f.grid();
  double sum = 0.0;
  for (int i = 0; i < g.n_cells; ++i) {
    const double ax = std::abs(g.x(i));
    sum += f[i] * (weight == MomentWeight::AbsX ? ax : std::sqrt(ax));
  }
  return g.dx() * sum;
}

double lp_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw DomainError(fmt::format("lp_norm requires p >= 1 (got {})", p));
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    return m;
  }
  double sum = 0.0;
  if (p == 1.0) {
    for (double x : f.values()) sum += std::abs(x);
    return f.grid().dx() * sum;
  }
  if (p == 2.0) {
    for (double x : f.values()) sum += x * x;
    return std::sqrt(f.grid().dx() * sum);
  }
  for (double x : f.values()) sum += std::pow(std::abs(x), p);
  return std::pow(f.grid().dx() * sum, 1.0 / p);
}

Field gradient(const Field& f) {
  const GridSpec& g = f.grid();
  const int n = g.n_cells;
  const double inv2dx = 1.0 / (2.0 * g.dx());
  Field out(g);
  for (int i = 1; i < n - 1; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv2dx;
  if (g.boundary == Boundary::Periodic) {
    out[0] = (f[1] - f[n - 1]) * inv2dx;
    out[n - 1] = (f[0] - f[n - 2]) * inv2dx;
  } else {
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2dx;
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2dx;
  }
  return out;
}

}  // namespace crossdiff
