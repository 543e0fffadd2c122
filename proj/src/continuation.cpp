#include "crossdiff/continuation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

namespace {

/// Per-snapshot cell fields of one trajectory that the sweep statistics need.
struct Sampled {
  std::vector<double> times;
  std::vector<std::vector<double>> u, v, s, frac, grad, flux, drift;
};

Sampled sample(const Trajectory& traj) {
  const double alpha = traj.model.pressure.alpha;
  Sampled out;
  for (const State& st : traj.snapshots) {
    const Field s = st.total();
    const Field s_alpha = map(s, [alpha](double x, double) { return x > 0.0 ? std::pow(x, alpha) : 0.0; });
    const Field grad = gradient(s_alpha);
    const auto [w1, w2] = velocity_gradients(st, traj.model);
    const std::size_t n = s.size();
    std::vector<double> frac(n), flux(n), drift(n);
    for (std::size_t i = 0; i < n; ++i) {
      frac[i] = s[i] > 0.0 ? st.u[i] / s[i] : 0.0;
      flux[i] = st.u[i] * grad[i];
      drift[i] = w2[i] - w1[i];
    }
    out.times.push_back(st.t);
    out.u.push_back(st.u.raw());
    out.v.push_back(st.v.raw());
    out.s.push_back(s.raw());
    out.frac.push_back(std::move(frac));
    out.grad.push_back(grad.raw());
    out.flux.push_back(std::move(flux));
    out.drift.push_back(std::move(drift));
  }
  return out;
}

void check_compatible(const Trajectory& run, const Trajectory& reference) {
  if (!(run.grid == reference.grid)) throw DomainError("run and reference live on different grids");
  if (run.snapshots.size() != reference.snapshots.size()) {
    throw DomainError(fmt::format("run has {} snapshots, reference has {}", run.snapshots.size(),
                                  reference.snapshots.size()));
  }
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const double a = run.snapshots[k].t;
    const double b = reference.snapshots[k].t;
    if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(b))) {
      throw DomainError(fmt::format("snapshot {} at t = {} does not match reference t = {}", k, a, b));
    }
  }
}

/// Maps snapshots and cells to coarse cells.
struct CoarseIndex {
  int nt = 0;
  int nx = 0;
  double t0 = 0.0;
  double dt = 0.0;
  double dx = 0.0;
  double x0 = 0.0;
  std::vector<int> time_of;   // per snapshot
  std::vector<int> space_of;  // per fine cell

  CoarseIndex(const std::vector<double>& times, const GridSpec& grid, const CoarseWindow& window, double t_span) {
    t0 = times.empty() ? 0.0 : times.front();
    dt = window.dt;
    dx = window.dx;
    x0 = grid.x_min;
    nt = std::max(1, static_cast<int>(std::lround(t_span / dt)));
    nx = std::max(1, static_cast<int>(std::lround(grid.length() / dx)));
    for (double t : times) {
      time_of.push_back(std::clamp(static_cast<int>(std::floor((t - t0) / dt + 1e-9)), 0, nt - 1));
    }
    for (int i = 0; i < grid.n_cells; ++i) {
      space_of.push_back(std::clamp(static_cast<int>(std::floor((grid.x(i) - x0) / dx)), 0, nx - 1));
    }
  }

  int cell(std::size_t snapshot, std::size_t i) const { return time_of[snapshot] * nx + space_of[i]; }
  double t_center(int k) const { return t0 + (k / nx + 0.5) * dt; }
  double x_center(int k) const { return x0 + (k % nx + 0.5) * dx; }
};

std::vector<double> trapezoid_weights(const std::vector<double>& times) {
  std::vector<double> w(times.size(), 0.0);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double h = 0.5 * (times[k + 1] - times[k]);
    w[k] += h;
    w[k + 1] += h;
  }
  return w;
}

double masked_distance(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                       const std::vector<double>& times, double dx, const CoarseIndex* index,
                       const std::vector<bool>* mask) {
  const std::vector<double> w = trapezoid_weights(times);
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double row = 0.0;
    for (std::size_t i = 0; i < a[k].size(); ++i) {
      if (mask && !(*mask)[static_cast<std::size_t>(index->cell(k, i))]) continue;
      const double d = a[k][i] - b[k][i];
      row += d * d;
    }
    sum += w[k] * dx * row;
  }
  return std::sqrt(sum);
}

std::vector<bool> mask_from(const Sampled& ref, const CoarseIndex& index, const MaskTolerances& tol) {
  double s_max = 0.0, v_max = 0.0;
  for (std::size_t k = 0; k < ref.s.size(); ++k) {
    for (std::size_t i = 0; i < ref.s[k].size(); ++i) {
      s_max = std::max(s_max, ref.s[k][i]);
      v_max = std::max(v_max, std::abs(ref.drift[k][i]));
    }
  }
  const double s_tol = tol.s_rel * s_max;
  const double v_tol = tol.v_rel * v_max;
  const std::size_t cells = static_cast<std::size_t>(index.nt * index.nx);
  std::vector<double> s_sum(cells, 0.0), v_sum(cells, 0.0);
  std::vector<int> count(cells, 0);
  for (std::size_t k = 0; k < ref.s.size(); ++k) {
    for (std::size_t i = 0; i < ref.s[k].size(); ++i) {
      const auto c = static_cast<std::size_t>(index.cell(k, i));
      s_sum[c] += ref.s[k][i];
      v_sum[c] += std::abs(ref.drift[k][i]);
      ++count[c];
    }
  }
  // A coarse cell leaves S when the mixture is present there and the two
  // species feel the same drift.
  std::vector<bool> in_s(cells, true);
  for (std::size_t c = 0; c < cells; ++c) {
    if (count[c] == 0) continue;
    const double s_bar = s_sum[c] / count[c];
    const double v_bar = v_sum[c] / count[c];
    in_s[c] = !(s_bar > s_tol && v_bar < v_tol);
  }
  return in_s;
}

FluctuationStats stats_from(const Sampled& run, const Sampled& ref, const CoarseIndex& index, double alpha,
                            const std::vector<bool>& mask) {
  const std::size_t cells = static_cast<std::size_t>(index.nt * index.nx);
  FluctuationStats stats;
  stats.time_cells = index.nt;
  stats.space_cells = index.nx;
  stats.cells.assign(cells, CellMoments{});
  std::vector<double> s_sum(cells, 0.0), drift_sum(cells, 0.0);
  for (std::size_t k = 0; k < run.frac.size(); ++k) {
    for (std::size_t i = 0; i < run.frac[k].size(); ++i) {
      const auto c = static_cast<std::size_t>(index.cell(k, i));
      const double l1 = run.frac[k][i] - ref.frac[k][i];
      const double l2 = run.grad[k][i] - ref.grad[k][i];
      CellMoments& m = stats.cells[c];
      m.m11 += l1 * l2;
      m.m20 += l1 * l1;
      m.m02 += l2 * l2;
      ++m.samples;
      s_sum[c] += ref.s[k][i];
      drift_sum[c] += ref.drift[k][i];
    }
  }
  for (std::size_t c = 0; c < cells; ++c) {
    CellMoments& m = stats.cells[c];
    m.t_center = index.t_center(static_cast<int>(c));
    m.x_center = index.x_center(static_cast<int>(c));
    m.in_s = mask[c];
    if (m.samples == 0) continue;
    const double inv = 1.0 / m.samples;
    m.m11 *= inv;
    m.m20 *= inv;
    m.m02 *= inv;
    m.s_mean = s_sum[c] * inv;
    m.f_local = alpha * m.s_mean * drift_sum[c] * inv;
    if (m.m20 > kMomentTolerance) m.slope = m.m11 / m.m20;
    if (m.m20 > kMomentTolerance && m.m02 > kMomentTolerance) m.cs_ratio = m.m11 * m.m11 / (m.m20 * m.m02);
  }
  return stats;
}

std::vector<DefectCell> defect_from(const Sampled& run, const Sampled& ref, const CoarseIndex& index, double alpha) {
  const std::size_t cells = static_cast<std::size_t>(index.nt * index.nx);
  std::vector<double> lhs(cells, 0.0), flux(cells, 0.0), drift(cells, 0.0);
  std::vector<int> count(cells, 0);
  for (std::size_t k = 0; k < run.grad.size(); ++k) {
    for (std::size_t i = 0; i < run.grad[k].size(); ++i) {
      const auto c = static_cast<std::size_t>(index.cell(k, i));
      const double d = run.grad[k][i] - ref.grad[k][i];
      lhs[c] += d * d;
      flux[c] += run.flux[k][i] - ref.flux[k][i];
      drift[c] += ref.drift[k][i];
      ++count[c];
    }
  }
  std::vector<DefectCell> out(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    out[c].t_center = index.t_center(static_cast<int>(c));
    out[c].x_center = index.x_center(static_cast<int>(c));
    if (count[c] == 0) continue;
    const double inv = 1.0 / count[c];
    out[c].lhs = lhs[c] * inv;
    out[c].rhs = alpha * (flux[c] * inv) * (drift[c] * inv);
  }
  return out;
}

/// Runs jobs 0..count-1 on up to `threads` workers; results land in their own slots.
template <class Job>
void parallel_for(int count, int threads, Job&& job) {
  const int workers = std::clamp(threads, 1, std::max(1, count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Cell averages of a fine field onto a grid `factor` times coarser.
std::vector<double> restrict_to(const std::vector<double>& fine, int factor) {
  std::vector<double> out(fine.size() / static_cast<std::size_t>(factor), 0.0);
  for (std::size_t i = 0; i < fine.size(); ++i) out[i / static_cast<std::size_t>(factor)] += fine[i];
  for (double& x : out) x /= factor;
  return out;
}

}  // namespace

void SweepSpec::validate() const {
  std::vector<std::string> problems;
  if (eps_ladder.size() < 3) problems.push_back(fmt::format("eps_ladder needs at least 3 rungs, got {}", eps_ladder.size()));
  for (std::size_t k = 0; k < eps_ladder.size(); ++k) {
    if (!(eps_ladder[k] >= 0.0) || !std::isfinite(eps_ladder[k])) {
      problems.push_back(fmt::format("eps_ladder[{}] = {} must be finite and >= 0", k, eps_ladder[k]));
    }
    if (k > 0 && !(eps_ladder[k] < eps_ladder[k - 1])) {
      problems.push_back(fmt::format("eps_ladder must be strictly decreasing at index {}", k));
    }
  }
  for (std::size_t k = 0; k < grid_ladder.size(); ++k) {
    if (grid_ladder[k] < 4) problems.push_back(fmt::format("grid_ladder[{}] = {} must be >= 4", k, grid_ladder[k]));
    if (k > 0 && (grid_ladder[k] <= grid_ladder[k - 1] || grid_ladder[k] % grid_ladder[k - 1] != 0)) {
      problems.push_back(fmt::format("grid_ladder[{}] must be a multiple of the previous entry", k));
    }
  }
  if (snapshots < 2) problems.push_back("snapshots must be >= 2");
  if (coarse.dt < 0.0 || coarse.dx < 0.0) problems.push_back("coarse window sizes must be >= 0");
  if (!initial) problems.push_back("initial state factory is missing");
  if (!(solver.t_end > 0.0)) problems.push_back("solver.t_end must be > 0");
  if (!problems.empty()) {
    std::string msg = "invalid sweep";
    for (const auto& p : problems) msg += "; " + p;
    throw DomainError(msg);
  }
  grid.validate();
}

CoarseWindow resolve_window(const CoarseWindow& window, double t_span, const GridSpec& grid) {
  CoarseWindow out = window;
  if (out.dt <= 0.0) out.dt = t_span / 20.0;
  if (out.dx <= 0.0) out.dx = grid.length() / 50.0;
  return out;
}

double FluctuationStats::mean_abs_m11() const {
  double sum = 0.0;
  int count = 0;
  for (const auto& c : cells) {
    if (c.samples == 0) continue;
    sum += std::abs(c.m11);
    ++count;
  }
  return count ? sum / count : 0.0;
}

double FluctuationStats::max_cs_ratio() const {
  double m = 0.0;
  for (const auto& c : cells) {
    if (c.cs_ratio) m = std::max(m, *c.cs_ratio);
  }
  return m;
}

void accumulate_moments(FluctuationStats& stats, const std::vector<std::vector<double>>& lambda1,
                        const std::vector<std::vector<double>>& lambda2, const std::vector<double>& times,
                        const GridSpec& grid, const CoarseWindow& window, double t_end) {
  if (lambda1.size() != times.size() || lambda2.size() != times.size()) {
    throw DomainError("moment samples must have one row per time");
  }
  const double span = times.empty() ? 0.0 : t_end - times.front();
  const CoarseIndex index(times, grid, resolve_window(window, span, grid), span);
  Sampled a, b;
  a.frac = lambda1;
  a.grad = lambda2;
  b.frac.assign(lambda1.size(), std::vector<double>(grid.size(), 0.0));
  b.grad = b.frac;
  b.s = b.frac;
  b.drift = b.frac;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (lambda1[k].size() != grid.size() || lambda2[k].size() != grid.size()) {
      throw DomainError("moment sample rows must match the grid");
    }
  }
  stats = stats_from(a, b, index, 1.0, std::vector<bool>(static_cast<std::size_t>(index.nt * index.nx), true));
}

double spacetime_distance(const std::vector<Field>& a, const std::vector<Field>& b, const std::vector<double>& times) {
  if (a.size() != b.size() || a.size() != times.size()) throw DomainError("distance needs matching snapshot lists");
  if (a.empty()) return 0.0;
  std::vector<std::vector<double>> ra, rb;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k].grid() == b[k].grid())) throw DomainError("distance needs matching grids");
    ra.push_back(a[k].raw());
    rb.push_back(b[k].raw());
  }
  return masked_distance(ra, rb, times, a.front().grid().dx(), nullptr, nullptr);
}

std::vector<bool> set_s_mask(const std::vector<State>& reference, const ModelSpec& model, const CoarseWindow& window,
                             double t_end, const MaskTolerances& tol) {
  if (reference.empty()) throw DomainError("mask needs at least one reference snapshot");
  Trajectory traj;
  traj.grid = reference.front().grid();
  traj.model = model;
  traj.snapshots = reference;
  const Sampled ref = sample(traj);
  const double span = t_end - ref.times.front();
  const CoarseIndex index(ref.times, traj.grid, resolve_window(window, span, traj.grid), span);
  return mask_from(ref, index, tol);
}

FluctuationStats fluctuation_stats(const Trajectory& run, const Trajectory& reference, const CoarseWindow& window,
                                   const ModelSpec& model, const MaskTolerances& tol) {
  check_compatible(run, reference);
  Trajectory ref_traj = reference;
  ref_traj.model = model;
  const Sampled a = sample(run);
  const Sampled b = sample(ref_traj);
  const double span = b.times.back() - b.times.front();
  const CoarseIndex index(b.times, run.grid, resolve_window(window, span, run.grid), span);
  return stats_from(a, b, index, model.pressure.alpha, mask_from(b, index, tol));
}

std::vector<DefectCell> defect_cells(const Trajectory& run, const Trajectory& reference, const CoarseWindow& window,
                                     const ModelSpec& model) {
  check_compatible(run, reference);
  Trajectory ref_traj = reference;
  ref_traj.model = model;
  const Sampled a = sample(run);
  const Sampled b = sample(ref_traj);
  const double span = b.times.back() - b.times.front();
  const CoarseIndex index(b.times, run.grid, resolve_window(window, span, run.grid), span);
  return defect_from(a, b, index, model.pressure.alpha);
}

SweepReport eps_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t rungs = spec.eps_ladder.size();
  const State initial = spec.initial(spec.grid);
  const double t_span = spec.solver.t_end - initial.t;
  if (!(t_span > 0.0)) throw DomainError("solver.t_end must lie after the initial time");

  SolverParams params = spec.solver;
  params.output_interval = t_span / spec.snapshots;
  params.output_every = 1;

  std::vector<Trajectory> runs(rungs);
  const int grid_jobs = static_cast<int>(spec.grid_ladder.size());
  std::vector<Trajectory> grid_runs(spec.grid_ladder.size());
  parallel_for(static_cast<int>(rungs) + grid_jobs, spec.threads, [&](int job) {
    if (job < static_cast<int>(rungs)) {
      ModelSpec model = spec.base_model;
      model.epsilon = spec.eps_ladder[static_cast<std::size_t>(job)];
      runs[static_cast<std::size_t>(job)] = run(initial, model, params);
      return;
    }
    const std::size_t g = static_cast<std::size_t>(job - static_cast<int>(rungs));
    GridSpec grid = spec.grid;
    grid.n_cells = spec.grid_ladder[g];
    ModelSpec model = spec.base_model;
    model.epsilon = spec.eps_ladder.back();
    grid_runs[g] = run(spec.initial(grid), model, params);
  });

  SweepReport report;
  report.reference_epsilon = spec.eps_ladder.back();
  report.window = resolve_window(spec.coarse, t_span, spec.grid);

  const Trajectory& reference = runs.back();
  const Sampled ref = sample(reference);
  report.times = ref.times;
  const CoarseIndex index(ref.times, spec.grid, report.window, t_span);
  const std::vector<bool> mask = mask_from(ref, index, spec.mask);
  const double dx = spec.grid.dx();
  const double alpha = spec.base_model.pressure.alpha;

  report.rungs.resize(rungs);
  parallel_for(static_cast<int>(rungs), spec.threads, [&](int job) {
    const auto k = static_cast<std::size_t>(job);
    check_compatible(runs[k], reference);
    const Sampled cur = sample(runs[k]);
    RungReport& r = report.rungs[k];
    r.epsilon = spec.eps_ladder[k];
    r.steps = runs[k].steps;
    r.dist_s = masked_distance(cur.s, ref.s, ref.times, dx, nullptr, nullptr);
    r.dist_grad = masked_distance(cur.grad, ref.grad, ref.times, dx, nullptr, nullptr);
    r.dist_u_masked = masked_distance(cur.u, ref.u, ref.times, dx, &index, &mask);
    r.dist_v_masked = masked_distance(cur.v, ref.v, ref.times, dx, &index, &mask);
    r.stats = stats_from(cur, ref, index, alpha, mask);
    r.defect = defect_from(cur, ref, index, alpha);
    double gap = 0.0, lhs = 0.0;
    for (const auto& c : r.defect) {
      gap += std::abs(c.gap());
      lhs += std::abs(c.lhs);
    }
    if (!r.defect.empty()) {
      r.mean_abs_gap = gap / static_cast<double>(r.defect.size());
      r.mean_abs_lhs = lhs / static_cast<double>(r.defect.size());
    }
  });

  for (std::size_t g = 0; g < grid_runs.size(); ++g) {
    GridRow row{spec.grid_ladder[g], 0.0};
    if (g + 1 < grid_runs.size()) {
      const Sampled coarse = sample(grid_runs[g]);
      const Sampled fine = sample(grid_runs[g + 1]);
      const int factor = spec.grid_ladder[g + 1] / spec.grid_ladder[g];
      std::vector<std::vector<double>> fine_avg;
      for (const auto& f : fine.s) fine_avg.push_back(restrict_to(f, factor));
      row.dist_s_to_next = masked_distance(coarse.s, fine_avg, coarse.times, grid_runs[g].grid.dx(), nullptr, nullptr);
    }
    report.grid_study.push_back(row);
  }
  return report;
}

std::vector<std::vector<DefectCell>> defect_measure_check(const SweepReport& report) {
  std::vector<std::vector<DefectCell>> out;
  for (std::size_t k = 0; k + 1 < report.rungs.size(); ++k) out.push_back(report.rungs[k].defect);
  return out;
}

}  // namespace crossdiff
