#include "crossdiff/solver.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

void SolverParams::validate() const {
  if (!(cfl > 0.0) || !std::isfinite(cfl)) throw DomainError(fmt::format("cfl must be positive (got {})", cfl));
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError(fmt::format("t_end must be positive (got {})", t_end));
  if (output_every < 1) throw DomainError("output_every must be >= 1");
  if (max_steps < 1) throw DomainError("max_steps must be >= 1");
  if (!(positivity_floor >= 0.0)) throw DomainError("positivity_floor must be >= 0");
  if (!(output_interval >= 0.0)) throw DomainError("output_interval must be >= 0");
  if (!(fixed_dt >= 0.0)) throw DomainError("fixed_dt must be >= 0");
}

namespace {

double minmod(double a, double b) {
  if (a > 0.0 && b > 0.0) return std::min(a, b);
  if (a < 0.0 && b < 0.0) return std::max(a, b);
  return 0.0;
}

double power_of(double s, double alpha) {
  if (alpha == 0.0) return 1.0;
  if (alpha == 1.0) return s;
  if (alpha == 2.0) return s * s;
  return std::pow(s, alpha);
}

}  // namespace

Stepper::Stepper(const GridSpec& grid, const ModelSpec& model, Reconstruction reconstruction)
    : grid_(grid), model_(model), reconstruction_(reconstruction) {
  grid_.validate();
  model_.validate();
  dv1_face_ = model_.v1.face_derivative(grid_);
  dv2_face_ = model_.v2.face_derivative(grid_);
  kernels_ = model_.has_kernels();
  if (kernels_) {
    const double dx = grid_.dx();
    k11_ = model_.kernels.k11.sample(dx);
    k12_ = model_.kernels.k12.sample(dx);
    k21_ = model_.kernels.k21.sample(dx);
    k22_ = model_.kernels.k22.sample(dx);
    for (const SampledKernel* k : {&k11_, &k12_, &k21_, &k22_}) {
      if (k->weights.size() > grid_.size()) throw DomainError("kernel stencil is wider than the grid");
    }
  }
}

std::pair<std::vector<double>, std::vector<double>> Stepper::face_velocities(const State& state) const {
  std::vector<double> a1, a2;
  face_velocities_into(state, a1, a2);
  return {a1, a2};
}

void Stepper::face_velocities_into(const State& state, std::vector<double>& a1, std::vector<double>& a2) const {
  a1.assign(dv1_face_.begin(), dv1_face_.end());
  a2.assign(dv2_face_.begin(), dv2_face_.end());
  if (!kernels_) return;
  auto conv = [&](const Field& f, const SampledKernel& k) { return k.is_zero() ? Field(grid_) : convolve(f, k); };
  Field c1 = conv(state.u, k11_);
  c1 += conv(state.v, k12_);
  Field c2 = conv(state.v, k22_);
  c2 += conv(state.u, k21_);
  const int n = grid_.n_cells;
  const double inv_dx = 1.0 / grid_.dx();
  for (int j = 0; j < n; ++j) {
    const int r = j + 1 == n ? 0 : j + 1;
    a1[j] += (c1[r] - c1[j]) * inv_dx;
    a2[j] += (c2[r] - c2[j]) * inv_dx;
  }
}

double Stepper::stable_dt(const State& state, double cfl) const {
  const int n = grid_.n_cells;
  const double dx = grid_.dx();
  const double alpha = model_.pressure.alpha;
  const double cu = model_.pressure.weight_u;
  const double cv = model_.pressure.weight_v;
  const int faces = grid_.boundary == Boundary::Periodic ? n : n - 1;

  double diffusivity = 0.0;
  for (int j = 0; j < faces; ++j) {
    const int r = j + 1 == n ? 0 : j + 1;
    const double sl = cu * state.u[j] + cv * state.v[j];
    const double sr = cu * state.u[r] + cv * state.v[r];
    if (alpha >= 1.0) {
      const double top = std::max(sl, sr);
      if (top > 0.0) diffusivity = std::max(diffusivity, power_of(top, alpha - 1.0));
    } else {
      for (double s : {sl, sr}) {
        if (s > 0.0) diffusivity = std::max(diffusivity, std::pow(s, alpha - 1.0) / alpha);
      }
    }
  }

  double speed = 0.0;
  std::vector<double>& a1 = ws_.a1;
  std::vector<double>& a2 = ws_.a2;
  face_velocities_into(state, a1, a2);
  for (int j = 0; j < faces; ++j) speed = std::max({speed, std::abs(a1[j]), std::abs(a2[j])});

  const double eps = model_.epsilon;
  double dt = std::numeric_limits<double>::infinity();
  if (diffusivity + eps > 0.0) dt = dx * dx / (2.0 * (diffusivity + eps));
  dt = std::min(dt, dx / (speed + 1e-30));
  if (model_.has_growth()) {
    double rate = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = cu * state.u[i] + cv * state.v[i];
      rate = std::max({rate, std::abs(model_.g1(s)), std::abs(model_.g2(s))});
    }
    if (rate > 0.0) dt = std::min(dt, 1.0 / rate);
  }
  return cfl * dt;
}

State Stepper::step(const State& state, double dt, double positivity_floor, double* clipped) const {
  State out{state.t + dt, Field(grid_), Field(grid_)};
  step_into(state, dt, out, positivity_floor, clipped);
  return out;
}

void Stepper::step_into(const State& state, double dt, State& out, double positivity_floor, double* clipped) const {
  const int n = grid_.n_cells;
  const std::size_t un = grid_.size();
  const double dx = grid_.dx();
  const double alpha = model_.pressure.alpha;
  const double cu = model_.pressure.weight_u;
  const double cv = model_.pressure.weight_v;
  const double eps = model_.epsilon;
  const bool periodic = grid_.boundary == Boundary::Periodic;
  const bool limited = reconstruction_ == Reconstruction::Minmod;
  const int faces = periodic ? n : n - 1;

  Workspace& w = ws_;
  w.resize(un);
  for (int i = 0; i < n; ++i) {
    const double su = cu * state.u[i];
    const double sv = cv * state.v[i];
    const double s = su + sv;
    w.total[i] = s;
    w.power[i] = power_of(s, alpha);
    w.frac_u[i] = s > 0.0 ? su / s : 0.0;
    w.frac_v[i] = s > 0.0 ? sv / s : 0.0;
  }

  // Limited slopes: species fractions (zero next to vacuum) and densities, both zero at walls.
  std::fill(w.slope_fu.begin(), w.slope_fu.end(), 0.0);
  std::fill(w.slope_fv.begin(), w.slope_fv.end(), 0.0);
  std::fill(w.slope_u.begin(), w.slope_u.end(), 0.0);
  std::fill(w.slope_v.begin(), w.slope_v.end(), 0.0);
  if (limited) {
    for (int i = 0; i < n; ++i) {
      if (!periodic && (i == 0 || i == n - 1)) continue;
      const int l = i == 0 ? n - 1 : i - 1;
      const int r = i + 1 == n ? 0 : i + 1;
      w.slope_u[i] = minmod(state.u[i] - state.u[l], state.u[r] - state.u[i]);
      w.slope_v[i] = minmod(state.v[i] - state.v[l], state.v[r] - state.v[i]);
      if (w.total[l] <= 0.0 || w.total[i] <= 0.0 || w.total[r] <= 0.0) continue;
      w.slope_fu[i] = minmod(w.frac_u[i] - w.frac_u[l], w.frac_u[r] - w.frac_u[i]);
      w.slope_fv[i] = minmod(w.frac_v[i] - w.frac_v[l], w.frac_v[r] - w.frac_v[i]);
    }
  }

  face_velocities_into(state, w.a1, w.a2);

  Transfers& lu = w.lu;
  Transfers& lv = w.lv;
  lu.clear();
  lv.clear();
  for (int j = 0; j < faces; ++j) {
    const int r = j + 1 == n ? 0 : j + 1;

    const double grad_power = (w.power[r] - w.power[j]) / dx;
    if (grad_power > 0.0) {
      const double fu = w.frac_u[r] - 0.5 * w.slope_fu[r];
      const double fv = w.frac_v[r] - 0.5 * w.slope_fv[r];
      lu.move(r, j, fu * grad_power / (alpha * cu));
      lv.move(r, j, fv * grad_power / (alpha * cv));
    } else if (grad_power < 0.0) {
      const double fu = w.frac_u[j] + 0.5 * w.slope_fu[j];
      const double fv = w.frac_v[j] + 0.5 * w.slope_fv[j];
      lu.move(j, r, -fu * grad_power / (alpha * cu));
      lv.move(j, r, -fv * grad_power / (alpha * cv));
    }

    const double a1 = w.a1[j];
    const double a2 = w.a2[j];
    if (a1 > 0.0) lu.move(r, j, a1 * (state.u[r] - 0.5 * w.slope_u[r]));
    else if (a1 < 0.0) lu.move(j, r, -a1 * (state.u[j] + 0.5 * w.slope_u[j]));
    if (a2 > 0.0) lv.move(r, j, a2 * (state.v[r] - 0.5 * w.slope_v[r]));
    else if (a2 < 0.0) lv.move(j, r, -a2 * (state.v[j] + 0.5 * w.slope_v[j]));

    if (eps > 0.0) {
      const double k = eps / dx;
      lu.move(j, r, k * state.u[j]);
      lu.move(r, j, k * state.u[r]);
      lv.move(j, r, k * state.v[j]);
      lv.move(r, j, k * state.v[r]);
    }
  }

  // Growth enters the same ledger as a per-cell source or sink.
  if (model_.has_growth()) {
    for (int i = 0; i < n; ++i) {
      const double gu = model_.g1(w.total[i]) * state.u[i] * dx;
      const double gv = model_.g2(w.total[i]) * state.v[i] * dx;
      (gu >= 0.0 ? lu.gain[i] : lu.loss[i]) += std::abs(gu);
      (gv >= 0.0 ? lv.gain[i] : lv.loss[i]) += std::abs(gv);
    }
  }

  if (out.u.size() != un || !(out.u.grid() == grid_)) out.u = Field(grid_);
  if (out.v.size() != un || !(out.v.grid() == grid_)) out.v = Field(grid_);
  out.t = state.t + dt;
  const double ratio = dt / dx;
  double clipped_here = 0.0;
  auto finish = [&](const Field& old, const Transfers& ledger, Field& result, const char* name) {
    for (int i = 0; i < n; ++i) {
      double value = (old[i] - ratio * ledger.loss[i]) + ratio * ledger.gain[i];
      if (!std::isfinite(value)) {
        throw StabilityError(fmt::format("non-finite {} in cell {} at t = {}", name, i, state.t + dt));
      }
      if (value < 0.0) {
        if (value < -positivity_floor) {
          throw StabilityError(fmt::format("negative {} = {:.3e} in cell {} at t = {} (dt = {:.3e})", name, value, i,
                                           state.t + dt, dt));
        }
        clipped_here -= value * dx;
        value = 0.0;
      }
      result[i] = value;
    }
  };
  finish(state.u, lu, out.u, "u");
  finish(state.v, lv, out.v, "v");
  if (clipped) *clipped += clipped_here;
}

double stable_dt(const State& state, const ModelSpec& model, double cfl, double t_end) {
  const double dt = Stepper(state.grid(), model).stable_dt(state, cfl);
  return std::min(dt, t_end - state.t);
}

State step(const State& state, const ModelSpec& model, double dt, double positivity_floor) {
  return Stepper(state.grid(), model).step(state, dt, positivity_floor);
}

State swap_species(const State& state) { return State{state.t, state.v, state.u}; }

Trajectory run(const State& initial, const ModelSpec& model, const SolverParams& params, const StepObserver& observer) {
  params.validate();
  initial.validate();
  const Stepper stepper(initial.grid(), model, params.reconstruction);

  Trajectory traj;
  traj.grid = initial.grid();
  traj.model = model;
  traj.snapshots.push_back(initial);

  const double t_end = params.t_end;
  const double interval = params.output_interval;
  long long next_index = 1;
  const double t_start = initial.t;
  auto next_output = [&] { return std::min(t_end, t_start + interval * static_cast<double>(next_index)); };
  auto close_to = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };

  State current = initial;
  State next = initial;
  long long steps = 0;
  while (!close_to(current.t, t_end) && current.t < t_end) {
    if (steps >= params.max_steps) {
      throw MaxStepsExceeded(fmt::format("reached max_steps = {} at t = {} < t_end = {}", params.max_steps, current.t, t_end));
    }
    double dt = params.fixed_dt > 0.0 ? params.fixed_dt : stepper.stable_dt(current, params.cfl);
    double target = t_end;
    if (interval > 0.0) target = next_output();
    if (dt >= target - current.t || close_to(current.t + dt, target)) dt = target - current.t;

    stepper.step_into(current, dt, next, params.positivity_floor, &traj.clipped_mass);
    const bool landed = dt == target - current.t;
    if (landed) next.t = target;
    ++steps;
    traj.dt_history.push_back(dt);
    if (observer) observer(current, next, dt);

    const bool final_step = close_to(next.t, t_end);
    bool record = final_step;
    if (interval > 0.0) {
      if (landed) {
        record = true;
        ++next_index;
      }
    } else if (steps % params.output_every == 0) {
      record = true;
    }
    std::swap(current, next);
    if (record) traj.snapshots.push_back(current);
  }
  traj.steps = steps;
  return traj;
}

}  // namespace crossdiff
