#pragma once

// Uniform 1D finite-volume mesh, cell-average fields and the calculus
// primitives (quadrature, norms, discrete gradient) shared by every module.

#include <cstddef>
#include <span>
#include <vector>

namespace crossdiff {

enum class Boundary { Periodic, NoFlux };

struct GridSpec {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_cells = 4;
  Boundary boundary = Boundary::NoFlux;

  /// Throws DomainError unless x_max > x_min and n_cells >= 4.
  void validate() const;

  double dx() const { return (x_max - x_min) / n_cells; }
  double length() const { return x_max - x_min; }
  /// Cell midpoint.
  double x(int i) const { return x_min + (i + 0.5) * dx(); }
  /// Right interface of cell i.
  double x_face(int i) const { return x_min + (i + 1) * dx(); }
  std::size_t size() const { return static_cast<std::size_t>(n_cells); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Cell-average values on a grid. The length always matches the grid.
class Field {
 public:
  Field() = default;
  explicit Field(const GridSpec& grid, double fill = 0.0);
  Field(const GridSpec& grid, std::vector<double> values);

  template <class F>
  static Field from_function(const GridSpec& grid, F&& f) {
    Field out(grid);
    for (int i = 0; i < grid.n_cells; ++i) out.values_[i] = f(grid.x(i));
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& raw() { return values_; }
  const std::vector<double>& raw() const { return values_; }

  bool all_finite() const;
  double max() const;
  double min() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double a);

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);

/// Pointwise map, f(value, x).
template <class F>
Field map(const Field& in, F&& f) {
  Field out(in.grid());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i], in.grid().x(static_cast<int>(i)));
  return out;
}

/// Pointwise binary map, f(a, b, x).
template <class F>
Field zip(const Field& a, const Field& b, F&& f) {
  Field out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i], a.grid().x(static_cast<int>(i)));
  return out;
}

struct State {
  double t = 0.0;
  Field u;
  Field v;

  const GridSpec& grid() const { return u.grid(); }
  Field total() const { return u + v; }
  /// Throws DomainError if the species live on different grids, are negative or non-finite.
  void validate() const;
};

enum class MomentWeight { AbsX, AbsXHalf };

/// dx * sum f_i, accumulated left to right.
double integrate(const Field& f);
double moment(const Field& f, MomentWeight weight);
/// (dx * sum |f_i|^p)^(1/p), max |f_i| for p = infinity. Rejects p < 1.
double lp_norm(const Field& f, double p);
/// max(|f_0|, |f_{n-1}|) / max |f|, 0 for a zero field. Used to check that a
/// NoFlux domain is wide enough to stand in for the whole line.
double boundary_ratio(const Field& f);
inline constexpr double kBoundaryRatioLimit = 1e-12;

/// Centered differences; wraps for Periodic, second-order one-sided at NoFlux ends.
Field gradient(const Field& f);

}  // namespace crossdiff
