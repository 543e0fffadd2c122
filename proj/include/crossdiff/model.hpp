#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "crossdiff/domain.hpp"

namespace crossdiff {

struct PressureLaw {
  double alpha = 2.0;
  double weight_u = 1.0;
  double weight_v = 1.0;

  bool logarithmic() const { return alpha == 1.0; }
  bool weighted() const { return weight_u != 1.0 || weight_v != 1.0; }

  friend bool operator==(const PressureLaw&, const PressureLaw&) = default;
};

/// p(s) = s^(alpha-1)/(alpha-1), or log s at alpha = 1. Throws DomainError for s < 0, or s = 0 with alpha <= 1.
double pressure_value(double s, const PressureLaw& law);

/// Piecewise-linear lookup table over an increasing abscissa, constant beyond the ends.
class Table {
 public:
  Table() = default;
  Table(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const;
  bool empty() const { return xs_.empty(); }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  double max_abs_x() const;

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// A confining or driving potential V(x).
struct Profile {
  enum class Kind { Zero, Linear, Quadratic, Tabulated };
  Kind kind = Kind::Zero;
  /// Linear: V = coeff * x.  Quadratic: V = coeff * x^2 / 2.
  double coeff = 0.0;
  Table table;

  static Profile zero() { return {}; }
  static Profile linear(double slope) { return {Kind::Linear, slope, {}}; }
  static Profile quadratic(double c) { return {Kind::Quadratic, c, {}}; }
  static Profile tabulated(Table t) { return {Kind::Tabulated, 0.0, std::move(t)}; }

  bool is_zero() const { return kind == Kind::Zero; }
  Field values(const GridSpec& grid) const;
  Field derivative(const GridSpec& grid) const;
  Field second_derivative(const GridSpec& grid) const;
  /// dV/dx at interface j (between cells j and j+1, wrapping for Periodic). Length n_cells.
  std::vector<double> face_derivative(const GridSpec& grid) const;

  friend bool operator==(const Profile&, const Profile&) = default;
};

/// Odd-length stencil K(k dx), k = -half..half.
struct SampledKernel {
  std::vector<double> weights;

  int half() const { return static_cast<int>(weights.size() / 2); }
  double at(int k) const { return weights[static_cast<std::size_t>(k + half())]; }
  bool is_zero() const;
};

/// Interaction kernel description, sampled on demand for a given cell width.
struct Kernel {
  enum class Kind { Zero, Gaussian, Tabulated };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;
  double sigma = 1.0;
  /// Truncation half-width; Gaussian default is 4 sigma.
  double radius = 0.0;
  Table table;
  /// Multiplier applied on sampling (used by the weighted reduction).
  double scale = 1.0;

  static Kernel zero() { return {}; }
  static Kernel gaussian(double amplitude, double sigma, double radius = 0.0);
  static Kernel tabulated(Table t);

  bool is_zero() const { return kind == Kind::Zero || scale == 0.0 || (kind == Kind::Gaussian && amplitude == 0.0); }
  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  SampledKernel sample(double dx) const;

  friend bool operator==(const Kernel&, const Kernel&) = default;
};

struct KernelSet {
  Kernel k11, k12, k21, k22;
  friend bool operator==(const KernelSet&, const KernelSet&) = default;
};

struct GrowthLaw {
  enum class Kind { Zero, Logistic, Tabulated };
  Kind kind = Kind::Zero;
  double rate = 0.0;
  double cap = 1.0;
  /// Tabulated G(s).
  Table table;

  static GrowthLaw zero() { return {}; }
  static GrowthLaw logistic(double rate, double cap) { return {Kind::Logistic, rate, cap, {}}; }

  bool is_zero() const { return kind == Kind::Zero || (kind == Kind::Logistic && rate == 0.0); }
  double operator()(double s) const;

  friend bool operator==(const GrowthLaw&, const GrowthLaw&) = default;
};

struct ModelSpec {
  PressureLaw pressure;
  Profile v1, v2;
  KernelSet kernels;
  GrowthLaw g1, g2;
  double epsilon = 0.0;

  bool has_growth() const { return !g1.is_zero() || !g2.is_zero(); }
  bool has_kernels() const;
  /// Throws DomainError on alpha <= 0, epsilon < 0, nonpositive weights or non-finite parameters.
  void validate() const;

  /// alpha = 2, V1 = -x, V2 = x, no kernels, no growth.
  static ModelSpec demo(double epsilon);

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// The same model with species labels exchanged.
ModelSpec swap_species(const ModelSpec& model);

/// Discrete convolution out_i = dx * sum_k K_k f_{i-k}; wraps for Periodic, zero-pads for NoFlux.
/// Throws DomainError when the stencil is wider than the grid.
Field convolve(const Field& density, const SampledKernel& kernel);
Field convolve_direct(const Field& density, const SampledKernel& kernel);
Field convolve_fft(const Field& density, const SampledKernel& kernel);
inline constexpr int kFftThreshold = 2048;

/// Aggregated potentials V^i + K^{i1}*u + K^{i2}*v, in cell values.
std::pair<Field, Field> velocity_potentials(const State& state, const ModelSpec& model);
/// Cell values of d/dx of the aggregated potentials.
std::pair<Field, Field> velocity_gradients(const State& state, const ModelSpec& model);
/// Cell values of d^2/dx^2 of the aggregated potentials.
std::pair<Field, Field> velocity_curvatures(const State& state, const ModelSpec& model);

/// Interface Darcy fluxes (1/alpha)(u/s) d_x s^alpha per species, with u/s := 0 at vacuum.
/// Entry j is the interface between cells j and j+1; NoFlux boundary interface carries 0.
struct InterfaceFluxes {
  std::vector<double> u;
  std::vector<double> v;
};
InterfaceFluxes darcy_flux(const State& state, const PressureLaw& law);

/// Equivalent unit-weight model for the scaled unknowns (c_u u, c_v v).
ModelSpec weighted_reduction(const ModelSpec& model);

}  // namespace crossdiff
