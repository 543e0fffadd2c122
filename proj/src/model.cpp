#include "crossdiff/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

double pressure_value(double s, const PressureLaw& law) {
  if (!(s >= 0.0)) throw DomainError(fmt::format("pressure requires s >= 0 (got {})", s));
  if (law.alpha <= 1.0 && s == 0.0) {
    throw DomainError(fmt::format("pressure is singular at s = 0 for alpha = {}", law.alpha));
  }
  if (law.logarithmic()) return std::log(s);
  return std::pow(s, law.alpha - 1.0) / (law.alpha - 1.0);
}

Table::Table(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() != ys_.size() || xs_.size() < 2) throw DomainError("table needs at least two (x, value) rows");
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) throw DomainError("table entries must be finite");
    if (i > 0 && !(xs_[i] > xs_[i - 1])) throw DomainError("table abscissae must be strictly increasing");
  }
}

double Table::operator()(double x) const {
  if (xs_.empty()) return 0.0;
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
  return (1.0 - w) * ys_[lo] + w * ys_[hi];
}

double Table::max_abs_x() const {
  if (xs_.empty()) return 0.0;
  return std::max(std::abs(xs_.front()), std::abs(xs_.back()));
}

// ---------------------------------------------------------------- profiles

Field Profile::values(const GridSpec& grid) const {
  switch (kind) {
    case Kind::Zero: return Field(grid);
    case Kind::Linear: return Field::from_function(grid, [&](double x) { return coeff * x; });
    case Kind::Quadratic: return Field::from_function(grid, [&](double x) { return 0.5 * coeff * x * x; });
    case Kind::Tabulated: return Field::from_function(grid, [&](double x) { return table(x); });
  }
  return Field(grid);
}

Field Profile::derivative(const GridSpec& grid) const {
  switch (kind) {
    case Kind::Zero: return Field(grid);
    case Kind::Linear: return Field(grid, coeff);
    case Kind::Quadratic: return Field::from_function(grid, [&](double x) { return coeff * x; });
    case Kind::Tabulated: return gradient(values(grid));
  }
  return Field(grid);
}

Field Profile::second_derivative(const GridSpec& grid) const {
  switch (kind) {
    case Kind::Zero:
    case Kind::Linear: return Field(grid);
    case Kind::Quadratic: return Field(grid, coeff);
    case Kind::Tabulated: return gradient(gradient(values(grid)));
  }
  return Field(grid);
}

std::vector<double> Profile::face_derivative(const GridSpec& grid) const {
  const int n = grid.n_cells;
  std::vector<double> out(grid.size(), 0.0);
  switch (kind) {
    case Kind::Zero: break;
    case Kind::Linear: std::fill(out.begin(), out.end(), coeff); break;
    case Kind::Quadratic:
      for (int j = 0; j < n; ++j) out[j] = coeff * grid.x_face(j);
      break;
    case Kind::Tabulated: {
      const Field v = values(grid);
      for (int j = 0; j < n; ++j) out[j] = (v[(j + 1) % n] - v[j]) / grid.dx();
      break;
    }
  }
  return out;
}

// ----------------------------------------------------------------- kernels

bool SampledKernel::is_zero() const {
  return std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
}

Kernel Kernel::gaussian(double amplitude, double sigma, double radius) {
  if (!(sigma > 0.0)) throw DomainError("gaussian kernel requires sigma > 0");
  Kernel k;
  k.kind = Kind::Gaussian;
  k.amplitude = amplitude;
  k.sigma = sigma;
  k.radius = radius > 0.0 ? radius : 4.0 * sigma;
  return k;
}

Kernel Kernel::tabulated(Table t) {
  Kernel k;
  k.kind = Kind::Tabulated;
  k.radius = t.max_abs_x();
  k.table = std::move(t);
  return k;
}

double Kernel::value(double x) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Gaussian: return scale * amplitude * std::exp(-0.5 * x * x / (sigma * sigma));
    case Kind::Tabulated:
      if (x < table.xs().front() || x > table.xs().back()) return 0.0;
      return scale * table(x);
  }
  return 0.0;
}

double Kernel::derivative(double x) const {
  if (kind == Kind::Gaussian) return -x / (sigma * sigma) * value(x);
  const double h = 1e-5 * std::max(1.0, radius);
  return (value(x + h) - value(x - h)) / (2.0 * h);
}

double Kernel::second_derivative(double x) const {
  if (kind == Kind::Gaussian) {
    const double s2 = sigma * sigma;
    return (x * x / s2 - 1.0) / s2 * value(x);
  }
  const double h = 1e-4 * std::max(1.0, radius);
  return (value(x + h) - 2.0 * value(x) + value(x - h)) / (h * h);
}

SampledKernel Kernel::sample(double dx) const {
  SampledKernel out;
  if (kind == Kind::Zero) {
    out.weights = {0.0};
    return out;
  }
  const int half = static_cast<int>(std::floor(radius / dx + 1e-9));
  out.weights.resize(static_cast<std::size_t>(2 * half + 1));
  for (int k = -half; k <= half; ++k) out.weights[static_cast<std::size_t>(k + half)] = value(k * dx);
  return out;
}

bool ModelSpec::has_kernels() const {
  return !kernels.k11.is_zero() || !kernels.k12.is_zero() || !kernels.k21.is_zero() || !kernels.k22.is_zero();
}

void ModelSpec::validate() const {
  if (!(pressure.alpha > 0.0) || !std::isfinite(pressure.alpha)) {
    throw DomainError(fmt::format("alpha must be positive (got {})", pressure.alpha));
  }
  if (!(pressure.weight_u > 0.0) || !(pressure.weight_v > 0.0)) {
    throw DomainError("pressure weights must be strictly positive");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError(fmt::format("epsilon must be >= 0 (got {})", epsilon));
  for (const GrowthLaw* g : {&g1, &g2}) {
    if (g->kind == GrowthLaw::Kind::Logistic && !(g->cap > 0.0)) throw DomainError("logistic growth requires cap > 0");
  }
}

ModelSpec ModelSpec::demo(double epsilon) {
  ModelSpec m;
  m.pressure.alpha = 2.0;
  m.v1 = Profile::linear(-1.0);
  m.v2 = Profile::linear(1.0);
  m.epsilon = epsilon;
  return m;
}

double GrowthLaw::operator()(double s) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Logistic: return rate * (1.0 - s / cap);
    case Kind::Tabulated: return table(s);
  }
  return 0.0;
}

ModelSpec swap_species(const ModelSpec& model) {
  ModelSpec out = model;
  std::swap(out.pressure.weight_u, out.pressure.weight_v);
  std::swap(out.v1, out.v2);
  out.kernels.k11 = model.kernels.k22;
  out.kernels.k22 = model.kernels.k11;
  out.kernels.k12 = model.kernels.k21;
  out.kernels.k21 = model.kernels.k12;
  std::swap(out.g1, out.g2);
  return out;
}

ModelSpec weighted_reduction(const ModelSpec& model) {
  const PressureLaw& p = model.pressure;
  if (!(p.weight_u > 0.0) || !(p.weight_v > 0.0)) throw DomainError("pressure weights must be strictly positive");
  ModelSpec out = model;
  out.kernels.k11.scale /= p.weight_u;
  out.kernels.k21.scale /= p.weight_u;
  out.kernels.k12.scale /= p.weight_v;
  out.kernels.k22.scale /= p.weight_v;
  out.pressure.weight_u = 1.0;
  out.pressure.weight_v = 1.0;
  return out;
}

// ------------------------------------------------------------- convolution

namespace {

void check_stencil(const Field& density, const SampledKernel& kernel) {
  if (kernel.weights.size() % 2 != 1) throw DomainError("kernel stencil must have odd length");
  if (kernel.weights.size() > density.size()) {
    throw DomainError(fmt::format("kernel stencil ({} points) is wider than the grid ({} cells)", kernel.weights.size(),
                                  density.size()));
  }
}

}  // namespace

Field convolve_direct(const Field& density, const SampledKernel& kernel) {
  check_stencil(density, kernel);
  const GridSpec& g = density.grid();
  const int n = g.n_cells;
  const int m = kernel.half();
  const bool periodic = g.boundary == Boundary::Periodic;
  Field out(g);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = -m; k <= m; ++k) {
      int j = i - k;
      if (periodic) {
        j = ((j % n) + n) % n;
      } else if (j < 0 || j >= n) {
        continue;
      }
      acc += kernel.at(k) * density[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = g.dx() * acc;
  }
  return out;
}

Field convolve(const Field& density, const SampledKernel& kernel) {
  if (kernel.is_zero()) {
    check_stencil(density, kernel);
    return Field(density.grid());
  }
  if (density.grid().n_cells >= kFftThreshold) return convolve_fft(density, kernel);
  return convolve_direct(density, kernel);
}

namespace {

struct AggregateParts {
  Field self_u, cross_u;  // K11*u, K12*v
  Field self_v, cross_v;  // K22*v, K21*u
};

Field convolve_kernel(const Field& f, const Kernel& k) {
  if (k.is_zero()) return Field(f.grid());
  return convolve(f, k.sample(f.grid().dx()));
}

// Sums are formed as own-species term plus cross term so that exchanging the
// species labels reproduces the same floating-point result.
std::pair<Field, Field> interaction_parts(const State& state, const ModelSpec& model) {
  const KernelSet& k = model.kernels;
  Field a = convolve_kernel(state.u, k.k11);
  a += convolve_kernel(state.v, k.k12);
  Field b = convolve_kernel(state.v, k.k22);
  b += convolve_kernel(state.u, k.k21);
  return {std::move(a), std::move(b)};
}

}  // namespace

std::pair<Field, Field> velocity_potentials(const State& state, const ModelSpec& model) {
  auto [a, b] = interaction_parts(state, model);
  return {model.v1.values(state.grid()) + a, model.v2.values(state.grid()) + b};
}

std::pair<Field, Field> velocity_gradients(const State& state, const ModelSpec& model) {
  const GridSpec& g = state.grid();
  if (!model.has_kernels()) return {model.v1.derivative(g), model.v2.derivative(g)};
  auto [a, b] = interaction_parts(state, model);
  return {model.v1.derivative(g) + gradient(a), model.v2.derivative(g) + gradient(b)};
}

std::pair<Field, Field> velocity_curvatures(const State& state, const ModelSpec& model) {
  const GridSpec& g = state.grid();
  if (!model.has_kernels()) return {model.v1.second_derivative(g), model.v2.second_derivative(g)};
  auto [a, b] = interaction_parts(state, model);
  return {model.v1.second_derivative(g) + gradient(gradient(a)), model.v2.second_derivative(g) + gradient(gradient(b))};
}

// --------------------------------------------------------------- Darcy flux

InterfaceFluxes darcy_flux(const State& state, const PressureLaw& law) {
  const GridSpec& g = state.grid();
  const int n = g.n_cells;
  const double cu = law.weight_u;
  const double cv = law.weight_v;
  std::vector<double> total(g.size()), power(g.size()), frac_u(g.size()), frac_v(g.size());
  for (int i = 0; i < n; ++i) {
    const double su = cu * state.u[i];
    const double sv = cv * state.v[i];
    const double s = su + sv;
    total[i] = s;
    power[i] = law.alpha == 1.0 ? s : (law.alpha == 2.0 ? s * s : std::pow(s, law.alpha));
    frac_u[i] = s > 0.0 ? su / s : 0.0;
    frac_v[i] = s > 0.0 ? sv / s : 0.0;
  }
  InterfaceFluxes out{std::vector<double>(g.size(), 0.0), std::vector<double>(g.size(), 0.0)};
  const int faces = g.boundary == Boundary::Periodic ? n : n - 1;
  for (int j = 0; j < faces; ++j) {
    const int r = (j + 1) % n;
    const double slope = (power[r] - power[j]) / g.dx();
    if (slope == 0.0) continue;
    const int donor = slope > 0.0 ? r : j;
    out.u[j] = frac_u[donor] * slope / (law.alpha * cu);
    out.v[j] = frac_v[donor] * slope / (law.alpha * cv);
  }
  return out;
}

}  // namespace crossdiff
