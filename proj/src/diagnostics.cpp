#include "crossdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crossdiff/errors.hpp"

namespace crossdiff {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

Field power(const Field& f, double a) {
  return map(f, [a](double x, double) { return x > 0.0 ? std::pow(x, a) : 0.0; });
}

double entropy_of(const State& s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i) sum += xlogx(s.u[i]) + xlogx(s.v[i]);
  return s.grid().dx() * sum;
}

struct Dissipation {
  double pressure;  // (4/alpha^2) |d_x s^(alpha/2)|^2
  double viscous;   // 4 eps (|d_x sqrt u|^2 + |d_x sqrt v|^2)
};

Dissipation dissipation_of(const State& s, const ModelSpec& model) {
  const double alpha = model.pressure.alpha;
  const Field total = s.total();
  Dissipation d{4.0 / (alpha * alpha) * interface_gradient_sq(power(total, 0.5 * alpha)), 0.0};
  if (model.epsilon > 0.0) {
    d.viscous = 4.0 * model.epsilon * (interface_gradient_sq(power(s.u, 0.5)) + interface_gradient_sq(power(s.v, 0.5)));
  }
  return d;
}

}  // namespace

double interface_gradient_sq(const Field& f) {
  const GridSpec& g = f.grid();
  const int n = g.n_cells;
  const int faces = g.boundary == Boundary::Periodic ? n : n - 1;
  double sum = 0.0;
  for (int j = 0; j < faces; ++j) {
    const double d = f[(j + 1) % n] - f[j];
    sum += d * d;
  }
  return sum / g.dx();
}

double interface_total_variation(const Field& f) {
  const GridSpec& g = f.grid();
  const int n = g.n_cells;
  const int faces = g.boundary == Boundary::Periodic ? n : n - 1;
  double sum = 0.0;
  for (int j = 0; j < faces; ++j) sum += std::abs(f[(j + 1) % n] - f[j]);
  return sum;
}

DiagnosticsRecord record(const State& state, const ModelSpec& model) {
  const GridSpec& g = state.grid();
  const double alpha = model.pressure.alpha;
  const double eps = model.epsilon;
  const Field total = state.total();

  DiagnosticsRecord r;
  r.t = state.t;
  r.mass_u = integrate(state.u);
  r.mass_v = integrate(state.v);
  r.moment1_s = moment(total, MomentWeight::AbsX);
  r.norms_u = {lp_norm(state.u, 1.0), lp_norm(state.u, 2.0), lp_norm(state.u, INFINITY)};
  r.norms_v = {lp_norm(state.v, 1.0), lp_norm(state.v, 2.0), lp_norm(state.v, INFINITY)};
  r.entropy = entropy_of(state);
  r.entropy_moment = moment(zip(state.u, state.v, [](double a, double b, double) {
                              return std::abs(xlogx(a)) + std::abs(xlogx(b));
                            }),
                            MomentWeight::AbsXHalf);
  r.grad_s_alpha_half_sq = interface_gradient_sq(power(total, 0.5 * alpha));
  r.grad_s_alpha_sq = interface_gradient_sq(power(total, alpha));
  r.eps_grad_sqrt_u_sq = eps * interface_gradient_sq(power(state.u, 0.5));
  r.eps_grad_sqrt_v_sq = eps * interface_gradient_sq(power(state.v, 0.5));
  r.eps_grad_u_sq = eps * interface_gradient_sq(state.u);
  r.eps_grad_v_sq = eps * interface_gradient_sq(state.v);
  if (alpha <= 2.0) r.grad_s_sq = interface_gradient_sq(total);
  if (alpha <= 1.0 / 3.0) r.fast_diff_grad = interface_total_variation(power(total, 1.0 - alpha));
  r.linf_s = lp_norm(total, INFINITY);

  double comp_u = 0.0, comp_v = 0.0, bound = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.n_cells; ++i) {
    const double ax = std::abs(g.x(i));
    const double floor_value = -2.0 / std::numbers::e * std::exp(-0.5 * ax);
    const double cu = xlogx(state.u[i]) + state.u[i] * ax;
    const double cv = xlogx(state.v[i]) + state.v[i] * ax;
    comp_u += cu;
    comp_v += cv;
    bound += floor_value;
    margin = std::min({margin, cu - floor_value, cv - floor_value});
  }
  r.log_compensated_u = g.dx() * comp_u;
  r.log_compensated_v = g.dx() * comp_v;
  r.log_lower_bound = g.dx() * bound;
  r.log_pointwise_margin = margin;
  return r;
}

std::vector<std::string> diagnostics_columns() {
  return {"t",
          "mass_u",
          "mass_v",
          "moment1_s",
          "l1_u",
          "l2_u",
          "linf_u",
          "l1_v",
          "l2_v",
          "linf_v",
          "entropy",
          "entropy_moment",
          "grad_s_alpha_half_sq",
          "grad_s_alpha_sq",
          "eps_grad_sqrt_u_sq",
          "eps_grad_sqrt_v_sq",
          "eps_grad_u_sq",
          "eps_grad_v_sq",
          "grad_s_sq",
          "fast_diff_grad",
          "linf_s",
          "log_compensated_u",
          "log_compensated_v",
          "log_lower_bound"};
}

std::vector<std::optional<double>> diagnostics_row(const DiagnosticsRecord& r) {
  return {r.t,
          r.mass_u,
          r.mass_v,
          r.moment1_s,
          r.norms_u.l1,
          r.norms_u.l2,
          r.norms_u.linf,
          r.norms_v.l1,
          r.norms_v.l2,
          r.norms_v.linf,
          r.entropy,
          r.entropy_moment,
          r.grad_s_alpha_half_sq,
          r.grad_s_alpha_sq,
          r.eps_grad_sqrt_u_sq,
          r.eps_grad_sqrt_v_sq,
          r.eps_grad_u_sq,
          r.eps_grad_v_sq,
          r.grad_s_sq,
          r.fast_diff_grad,
          r.linf_s,
          r.log_compensated_u,
          r.log_compensated_v,
          r.log_lower_bound};
}

double entropy_bound(const State& state, const ModelSpec& model) {
  const auto [c1, c2] = velocity_curvatures(state, model);
  const double mass = integrate(state.u) + integrate(state.v);
  double bound = (lp_norm(c1, INFINITY) + lp_norm(c2, INFINITY)) * mass;
  if (model.has_growth()) {
    double g1 = std::abs(model.g1(0.0));
    double g2 = std::abs(model.g2(0.0));
    double log_u = 0.0, log_v = 0.0;
    for (std::size_t i = 0; i < state.u.size(); ++i) {
      const double s = state.u[i] + state.v[i];
      g1 = std::max(g1, std::abs(model.g1(s)));
      g2 = std::max(g2, std::abs(model.g2(s)));
      log_u += std::abs(xlogx(state.u[i]));
      log_v += std::abs(xlogx(state.v[i]));
    }
    const double dx = state.grid().dx();
    bound += g1 * (integrate(state.u) + dx * log_u) + g2 * (integrate(state.v) + dx * log_v);
  }
  return bound;
}

double entropy_interval_residual(const State& before, const State& after, double dt, const ModelSpec& model) {
  const Dissipation d = dissipation_of(before, model);
  const double rate = (entropy_of(after) - entropy_of(before)) / dt;
  return rate + d.pressure + d.viscous - entropy_bound(before, model);
}

std::vector<double> entropy_dissipation_check(const Trajectory& traj) {
  if (traj.snapshots.size() < 2) throw DomainError("entropy check needs at least two snapshots");
  std::vector<double> out;
  out.reserve(traj.snapshots.size() - 1);
  for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
    const State& a = traj.snapshots[k];
    const State& b = traj.snapshots[k + 1];
    out.push_back(entropy_interval_residual(a, b, b.t - a.t, traj.model));
  }
  return out;
}

void EntropyMonitor::operator()(const State& before, const State& after, double dt) {
  residuals_.push_back(entropy_interval_residual(before, after, dt, model_));
  dts_.push_back(dt);
}

double EntropyMonitor::max_residual() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double r : residuals_) m = std::max(m, r);
  return m;
}

}  // namespace crossdiff
