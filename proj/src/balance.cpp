#include "crossdiff/balance.hpp"

#include <cmath>

#include <fmt/format.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double fraction(double a, double s) { return s > 0.0 ? a / s : 0.0; }

Field power(const Field& f, double a) {
  if (a == 1.0) return f;
  if (a == 2.0) return map(f, [](double x, double) { return x * x; });
  return map(f, [a](double x, double) { return x > 0.0 ? std::pow(x, a) : 0.0; });
}

void check_unweighted(const ModelSpec& model) {
  if (model.pressure.weighted()) {
    throw DomainError("balance laws are stated for unit pressure weights; apply weighted_reduction first");
  }
}

}  // namespace

std::string law_name(const LawSpec& law) {
  switch (law.law) {
    case Law::Entropy: return "entropy";
    case Law::RatioSquared: return "ratio_squared";
    case Law::RatioTheta: return fmt::format("ratio_theta_{}", law.theta);
    case Law::WeakFormU: return "weak_form_u";
    case Law::WeakFormV: return "weak_form_v";
    case Law::EnergyIdentity: return "energy_identity";
  }
  return "unknown";
}

Field law_density(const State& state, const LawSpec& law) {
  switch (law.law) {
    case Law::Entropy:
      return zip(state.u, state.v, [](double a, double b, double) { return xlogx(a) + xlogx(b); });
    case Law::RatioSquared:
    case Law::RatioTheta: {
      const double theta = law.effective_theta();
      return zip(state.u, state.v, [theta](double a, double b, double) {
        return a > 0.0 ? a * std::pow(a / (a + b), theta) : 0.0;
      });
    }
    case Law::WeakFormU: return state.u;
    case Law::WeakFormV: return state.v;
    case Law::EnergyIdentity: break;
  }
  throw DomainError("the energy identity is global; use EnergyAccumulator");
}

LawTerms law_terms(const State& state, const ModelSpec& model, const LawSpec& law) {
  check_unweighted(model);
  const GridSpec& g = state.grid();
  const std::size_t n = g.size();
  const double alpha = model.pressure.alpha;
  const double eps = model.epsilon;
  const Field& u = state.u;
  const Field& v = state.v;
  const Field s = state.total();
  const Field ds_alpha = gradient(power(s, alpha));
  const auto [w1, w2] = velocity_gradients(state, model);

  LawTerms out{Field(g), Field(g), Field(g)};
  switch (law.law) {
    case Law::Entropy: {
      const auto [c1, c2] = velocity_curvatures(state, model);
      const Field du = gradient(u);
      const Field dv = gradient(v);
      const Field ds_half = gradient(power(s, 0.5 * alpha));
      const Field dsqrt_u = gradient(power(u, 0.5));
      const Field dsqrt_v = gradient(power(v, 0.5));
      for (std::size_t i = 0; i < n; ++i) {
        const double eu = xlogx(u[i]);
        const double ev = xlogx(v[i]);
        const double entropy = eu + ev;
        out.density[i] = entropy;
        double flux = fraction(entropy + s[i], s[i]) * ds_alpha[i] / alpha + eu * w1[i] + ev * w2[i];
        if (u[i] > 0.0) flux += eps * du[i] * (1.0 + std::log(u[i]));
        if (v[i] > 0.0) flux += eps * dv[i] * (1.0 + std::log(v[i]));
        out.flux[i] = flux;
        double source = -4.0 / (alpha * alpha) * ds_half[i] * ds_half[i] + u[i] * c1[i] + v[i] * c2[i] -
                        4.0 * eps * (dsqrt_u[i] * dsqrt_u[i] + dsqrt_v[i] * dsqrt_v[i]);
        if (model.has_growth()) {
          const double gu = model.g1(s[i]);
          const double gv = model.g2(s[i]);
          if (u[i] > 0.0) source += u[i] * (1.0 + std::log(u[i])) * gu;
          if (v[i] > 0.0) source += v[i] * (1.0 + std::log(v[i])) * gv;
        }
        out.source[i] = source;
      }
      break;
    }
    case Law::RatioSquared:
    case Law::RatioTheta: {
      const double theta = law.effective_theta();
      const auto [c1, c2] = velocity_curvatures(state, model);
      const Field du = gradient(u);
      const Field ds = gradient(s);
      const Field frac = zip(u, s, [](double a, double b, double) { return fraction(a, b); });
      const Field dfrac = gradient(frac);
      for (std::size_t i = 0; i < n; ++i) {
        const double phi = frac[i];
        const double phi_t = std::pow(phi, theta);
        const double phi_t1 = phi_t * phi;
        const double relative = w1[i] - w2[i];
        // d_x(s d_x(V1 - V2))
        const double drift_div = ds[i] * relative + s[i] * (c1[i] - c2[i]);
        out.density[i] = u[i] * phi_t;
        out.flux[i] = phi_t1 * ds_alpha[i] / alpha + u[i] * phi_t * w1[i] -
                      theta / (theta + 2.0) * u[i] * phi_t1 * relative + (theta + 1.0) * eps * phi_t * du[i] -
                      theta * eps * phi_t1 * ds[i];
        double source = theta * phi_t1 * (1.0 - (theta + 1.0) / (theta + 2.0) * phi) * drift_div -
                        theta * (theta + 1.0) * eps * s[i] * std::pow(phi, theta - 1.0) * dfrac[i] * dfrac[i];
        if (model.has_growth()) {
          const double gu = model.g1(s[i]);
          const double gv = model.g2(s[i]);
          source += (theta + 1.0) * phi_t * u[i] * gu - theta * phi_t1 * (u[i] * gu + v[i] * gv);
        }
        out.source[i] = source;
      }
      break;
    }
    case Law::WeakFormU:
    case Law::WeakFormV: {
      const bool first = law.law == Law::WeakFormU;
      const Field& own = first ? u : v;
      const Field& w = first ? w1 : w2;
      const GrowthLaw& growth = first ? model.g1 : model.g2;
      for (std::size_t i = 0; i < n; ++i) {
        out.density[i] = own[i];
        out.flux[i] = fraction(own[i], s[i]) * ds_alpha[i] / alpha + own[i] * w[i];
        out.source[i] = own[i] * growth(s[i]);
      }
      break;
    }
    case Law::EnergyIdentity:
      throw DomainError("the energy identity is global; use EnergyAccumulator");
  }
  return out;
}

ResidualAccumulator::ResidualAccumulator(ModelSpec model, LawSpec law, TestFunction phi, const GridSpec& grid)
    : model_(std::move(model)), law_(law), phi_(std::move(phi)) {
  check_unweighted(model_);
  if (law_.law == Law::EnergyIdentity) throw DomainError("the energy identity is global; use EnergyAccumulator");
  if (!(phi_.space.half_width > 0.0) || !(phi_.time.half_width > 0.0)) {
    throw DomainError("test function widths must be positive");
  }
  if (phi_.space.lower() <= grid.x_min || phi_.space.upper() >= grid.x_max) {
    throw DomainError(fmt::format("test function '{}' support [{}, {}] touches the boundary of [{}, {}]", phi_.id,
                                  phi_.space.lower(), phi_.space.upper(), grid.x_min, grid.x_max));
  }
}

void ResidualAccumulator::operator()(const State& before, const State& after, double dt) {
  const double t_mid = before.t + 0.5 * dt;
  const double time_weight = phi_.time.value(t_mid);
  if (time_weight == 0.0) return;
  const GridSpec& g = before.grid();
  const double dx = g.dx();

  const LawTerms now = law_terms(before, model_, law_);
  const Field next = law_density(after, law_);
  double value = 0.0, magnitude = 0.0;
  for (int i = 0; i < g.n_cells; ++i) {
    const double x = g.x(i);
    const double phi = time_weight * phi_.space.value(x);
    const double phi_x = time_weight * phi_.space.derivative(x);
    if (phi == 0.0 && phi_x == 0.0) continue;
    const double change = (next[i] - now.density[i]) * phi;
    const double transport = dt * now.flux[i] * phi_x;
    const double source = -dt * now.source[i] * phi;
    value += change + transport + source;
    magnitude += std::abs(change) + std::abs(transport) + std::abs(source);
  }
  value_ += dx * value;
  magnitude_ += dx * magnitude;
}

BalanceResidual ResidualAccumulator::result(int refinement_level) const {
  return {law_, phi_.id, value_, magnitude_, refinement_level};
}

void EnergyAccumulator::operator()(const State& before, const State& after, double dt) {
  const double alpha = model_.pressure.alpha;
  const double eps = model_.epsilon;
  auto energy = [alpha](const State& st) { return integrate(power(st.total(), alpha + 1.0)) / (alpha + 1.0); };
  if (!initial_energy_) initial_energy_ = energy(before);
  boundary_term_ = energy(after) - *initial_energy_;

  const Field s = before.total();
  const Field s_alpha = power(s, alpha);
  const Field ds_alpha = gradient(s_alpha);
  const Field ds = gradient(s);
  const auto [w1, w2] = velocity_gradients(before, model_);
  double sum = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double dissipation = ds_alpha[i] * ds_alpha[i] / alpha;
    const double viscous = eps * ds[i] * ds_alpha[i];
    const double drift = (before.u[i] * w1[i] + before.v[i] * w2[i]) * ds_alpha[i];
    double growth = 0.0;
    if (model_.has_growth()) growth = s_alpha[i] * (before.u[i] * model_.g1(s[i]) + before.v[i] * model_.g2(s[i]));
    sum += dissipation + viscous + drift - growth;
    mag += std::abs(dissipation) + std::abs(viscous) + std::abs(drift) + std::abs(growth);
  }
  value_ += dt * s.grid().dx() * sum;
  magnitude_ += dt * s.grid().dx() * mag;
}

BalanceResidual conservation_law_residual(const Trajectory& traj, const LawSpec& law, const TestFunction& phi) {
  ResidualAccumulator acc(traj.model, law, phi, traj.grid);
  const double t_end = traj.snapshots.empty() ? 0.0 : traj.snapshots.back().t;
  if (phi.time.lower() < traj.snapshots.front().t || phi.time.upper() > t_end) {
    throw DomainError(fmt::format("test function '{}' time support must lie inside the trajectory", phi.id));
  }
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const State& a = traj.snapshots[k];
    const State& b = traj.snapshots[k + 1];
    acc(a, b, b.t - a.t);
  }
  return acc.result();
}

double weak_solution_residual(const Trajectory& traj, const TestFunction& phi, Species species) {
  const LawSpec law{species == Species::U ? Law::WeakFormU : Law::WeakFormV, 1.0};
  ResidualAccumulator acc(traj.model, law, phi, traj.grid);
  if (!traj.snapshots.empty() && phi.time.upper() > traj.snapshots.back().t) {
    throw DomainError(fmt::format("test function '{}' must vanish before the final time", phi.id));
  }
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const State& a = traj.snapshots[k];
    const State& b = traj.snapshots[k + 1];
    acc(a, b, b.t - a.t);
  }
  return acc.result().value;
}

double energy_identity_residual(const Trajectory& traj) {
  EnergyAccumulator acc(traj.model);
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const State& a = traj.snapshots[k];
    const State& b = traj.snapshots[k + 1];
    acc(a, b, b.t - a.t);
  }
  return acc.value();
}

}  // namespace crossdiff
