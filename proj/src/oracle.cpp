#include "crossdiff/oracle.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_porous(double alpha) {
  if (!(alpha > 1.0)) throw DomainError(fmt::format("compactly supported profile requires alpha > 1 (got {})", alpha));
}

double confined_profile(const ConfinedSteadyState& c, double level, double x) {
  const double potential = 0.5 * c.curvature * x * x;
  if (c.alpha == 1.0) return std::exp(level - potential);
  const double base = (c.alpha - 1.0) * (level - potential);
  return base > 0.0 ? std::pow(base, 1.0 / (c.alpha - 1.0)) : 0.0;
}

double confined_mass_at(const ConfinedSteadyState& c, double level) {
  using boost::math::quadrature::gauss_kronrod;
  if (level <= 0.0) return 0.0;
  // Support edge where p + V = level reaches zero pressure.
  const double edge = std::sqrt(2.0 * level / c.curvature);
  auto f = [&](double x) { return confined_profile(c, level, x); };
  return gauss_kronrod<double, 61>::integrate(f, -edge, edge, 15, 1e-14);
}

}  // namespace

double barenblatt_shape_coefficient(double alpha) {
  require_porous(alpha);
  return (alpha - 1.0) / (2.0 * alpha * (alpha + 1.0));
}

double barenblatt_level(double alpha, double mass) {
  require_porous(alpha);
  if (!(mass > 0.0)) throw DomainError("Barenblatt mass must be positive");
  const double p = 1.0 / (alpha - 1.0);
  const double k = barenblatt_shape_coefficient(alpha);
  const double unit = std::beta(0.5, p + 1.0) / std::sqrt(k);
  return std::pow(mass / unit, 1.0 / (p + 0.5));
}

double barenblatt_radius(const Barenblatt& b, double t) {
  const double tau = (t + b.t_offset) / b.alpha;
  if (!(tau > 0.0)) throw DomainError("Barenblatt profile requires t + t_offset > 0");
  const double level = barenblatt_level(b.alpha, b.mass);
  return std::sqrt(level / barenblatt_shape_coefficient(b.alpha)) * std::pow(tau, 1.0 / (b.alpha + 1.0));
}

double moment_radius(const Field& s, double alpha) {
  if (!(alpha > 1.0)) throw DomainError("moment radius needs alpha > 1");
  const double mass = integrate(s);
  if (!(mass > 0.0)) throw DomainError("moment radius needs positive mass");
  const double second = integrate(map(s, [](double v, double x) { return v * x * x; }));
  const double q = 1.0 / (alpha - 1.0);
  return std::sqrt((2.0 * q + 3.0) * second / mass);
}

double confined_level(const ConfinedSteadyState& c) {
  if (!(c.alpha >= 1.0)) throw DomainError("confined steady state requires alpha >= 1");
  if (!(c.curvature > 0.0)) throw DomainError("confined steady state requires a positive curvature");
  if (!(c.mass > 0.0)) throw DomainError("confined steady state requires a positive mass");
  if (c.alpha == 1.0) return std::log(c.mass / std::sqrt(2.0 * std::numbers::pi / c.curvature));
  auto residual = [&](double level) { return confined_mass_at(c, level) - c.mass; };
  double hi = 1.0;
  while (residual(hi) < 0.0) hi *= 2.0;
  double lo = hi / 2.0;
  while (residual(lo) > 0.0) lo /= 2.0;
  boost::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      residual, lo, hi, boost::math::tools::eps_tolerance<double>(50), iterations);
  return 0.5 * (a + b);
}

double evaluate_point(const ExactSolution& sol, double t, double x) {
  return std::visit(
      Overloaded{
          [&](const GaussianHeat& g) {
            const double tt = t + g.t_offset;
            if (!(tt > 0.0)) throw DomainError("Gaussian heat kernel requires t + t_offset > 0");
            const double spread = 4.0 * g.diffusivity * tt;
            const double dx = x - g.center;
            return g.mass / std::sqrt(std::numbers::pi * spread) * std::exp(-dx * dx / spread);
          },
          [&](const Barenblatt& b) {
            require_porous(b.alpha);
            const double tau = (t + b.t_offset) / b.alpha;
            if (!(tau > 0.0)) throw DomainError("Barenblatt profile requires t + t_offset > 0");
            const double beta = 1.0 / (b.alpha + 1.0);
            const double scale = std::pow(tau, -beta);
            const double y = x * scale;
            const double base = barenblatt_level(b.alpha, b.mass) - barenblatt_shape_coefficient(b.alpha) * y * y;
            return base > 0.0 ? scale * std::pow(base, 1.0 / (b.alpha - 1.0)) : 0.0;
          },
          [&](const ConfinedSteadyState& c) { return confined_profile(c, confined_level(c), x); },
      },
      sol);
}

Field evaluate(const ExactSolution& sol, double t, const GridSpec& grid) {
  if (const auto* c = std::get_if<ConfinedSteadyState>(&sol)) {
    const double level = confined_level(*c);
    return Field::from_function(grid, [&](double x) { return confined_profile(*c, level, x); });
  }
  return Field::from_function(grid, [&](double x) { return evaluate_point(sol, t, x); });
}

double exact_mass(const ExactSolution& sol, double t) {
  using boost::math::quadrature::gauss_kronrod;
  return std::visit(
      Overloaded{
          [&](const GaussianHeat& g) {
            const double width = std::sqrt(2.0 * g.diffusivity * (t + g.t_offset));
            auto f = [&](double x) { return evaluate_point(sol, t, x); };
            return gauss_kronrod<double, 61>::integrate(f, g.center - 40.0 * width, g.center + 40.0 * width, 15, 1e-14);
          },
          [&](const Barenblatt& b) {
            const double r = barenblatt_radius(b, t);
            auto f = [&](double x) { return evaluate_point(sol, t, x); };
            return gauss_kronrod<double, 61>::integrate(f, -r, r, 15, 1e-14);
          },
          [&](const ConfinedSteadyState& c) {
            if (c.alpha == 1.0) return c.mass;
            return confined_mass_at(c, confined_level(c));
          },
      },
      sol);
}

std::vector<ErrorRow> error_report(const Trajectory& traj, const ExactSolution& sol) {
  std::vector<ErrorRow> rows;
  rows.reserve(traj.snapshots.size());
  for (const State& snap : traj.snapshots) {
    if (lp_norm(snap.v, 1.0) != 0.0) throw DomainError("error_report requires a single-species trajectory (v = 0)");
    const Field diff = snap.u - evaluate(sol, snap.t, snap.grid());
    rows.push_back({snap.t, lp_norm(diff, 1.0), lp_norm(diff, 2.0), lp_norm(diff, INFINITY)});
  }
  return rows;
}

}  // namespace crossdiff
