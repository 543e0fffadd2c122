#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>

#include <boost/version.hpp>
#include <fmt/format.h>
#include <openssl/opensslv.h>

#include "crossdiff/balance.hpp"
#include "crossdiff/diagnostics.hpp"
#include "crossdiff/errors.hpp"
#include "crossdiff/io.hpp"
#include "crossdiff/oracle.hpp"
#include "crossdiff/svg.hpp"
#include "crossdiff/version.hpp"

namespace crossdiff::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Single writer for one command's output directory.
class Sink {
 public:
  Sink(fs::path dir, const OutputConfig& formats) : dir_(std::move(dir)), formats_(formats) {}

  bool csv() const { return formats_.csv; }
  bool json_enabled() const { return formats_.json; }
  bool svg() const { return formats_.svg; }

  void write(const std::string& name, const std::string& contents) {
    write_atomic(dir_ / name, contents);
    files_.push_back(name);
  }
  void write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  OutputConfig formats_;
  std::vector<std::string> files_;
};

json versions() {
  return {{"crossdiff", kVersion},
          {"fmt", FMT_VERSION},
          {"fftw", fftw_version_string()},
          {"boost", BOOST_LIB_VERSION},
          {"openssl", OPENSSL_VERSION_TEXT},
          {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                        NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

using Body = std::function<void(const RunConfig&, Sink&, std::ostream&, int threads)>;

int execute(const char* command, const fs::path& config_path, const CommandOptions& options, std::ostream& log,
            const Body& body) {
  const auto start = std::chrono::steady_clock::now();
  json manifest{{"tool", "crossdiff"}, {"command", command}, {"config", config_path.string()}};
  std::optional<fs::path> out = options.out;
  std::optional<Sink> sink;
  int code = kOk;
  bool configured = false;
  auto record_error = [&](int exit_code, const char* status, const char* type, const std::string& what) {
    code = exit_code;
    manifest["status"] = status;
    manifest["error"] = {{"type", type}, {"message", what}};
    log << "error (" << type << "): " << what << "\n";
  };
  try {
    RunConfig cfg = parse_config(config_path);
    if (out) {
      cfg.outputs.directory = *out;
    } else {
      out = cfg.outputs.directory;
    }
    if (!options.formats.empty()) {
      cfg.outputs.csv = cfg.outputs.json = cfg.outputs.svg = false;
      for (const auto& f : options.formats) {
        if (f == "csv") cfg.outputs.csv = true;
        else if (f == "json") cfg.outputs.json = true;
        else if (f == "svg") cfg.outputs.svg = true;
        else throw SchemaError({fmt::format("--format: unknown format '{}'", f)});
      }
    }
    manifest["config_hash"] = config_hash(cfg);
    const int threads = options.threads.value_or(1);
    if (threads < 1) throw SchemaError({"--threads: must be >= 1"});
    configured = true;
    sink.emplace(*out, cfg.outputs);
    body(cfg, *sink, log, threads);
    manifest["status"] = "ok";
  } catch (const SchemaError& e) {
    record_error(kConfigError, "config_error", "SchemaError", e.what());
    manifest["error"]["violations"] = e.violations();
  } catch (const IOError& e) {
    record_error(configured ? kFailure : kConfigError, configured ? "io_error" : "config_error", "IOError", e.what());
  } catch (const StabilityError& e) {
    record_error(kNumericalFailure, "numerical_failure", "StabilityError", e.what());
  } catch (const MaxStepsExceeded& e) {
    record_error(kNumericalFailure, "numerical_failure", "MaxStepsExceeded", e.what());
  } catch (const DomainError& e) {
    record_error(kConfigError, "config_error", "DomainError", e.what());
  } catch (const std::exception& e) {
    record_error(kFailure, "failure", "exception", e.what());
  }
  manifest["exit_code"] = code;
  manifest["versions"] = versions();
  manifest["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest["outputs"] = sink ? sink->files() : std::vector<std::string>{};
  if (out) {
    try {
      write_atomic(*out / "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
      log << "error: cannot write manifest: " << e.what() << "\n";
      if (code == kOk) code = kFailure;
    }
  }
  return code;
}

CsvTable diagnostics_table(const Trajectory& traj) {
  CsvTable table{diagnostics_columns(), {}};
  for (const State& st : traj.snapshots) table.add_row(diagnostics_row(record(st, traj.model)));
  return table;
}

/// min / max / final of every diagnostics column.
json series_summary(const CsvTable& table) {
  json out = json::object();
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    std::optional<double> lo, hi, last;
    for (const auto& row : table.rows) {
      if (!row[c]) continue;
      lo = lo ? std::min(*lo, *row[c]) : *row[c];
      hi = hi ? std::max(*hi, *row[c]) : *row[c];
      last = row[c];
    }
    if (!last) continue;
    out[table.columns[c]] = {{"min", *lo}, {"max", *hi}, {"final", *last}};
  }
  return out;
}

/// Largest boundary-to-peak density ratio over all snapshots; only meaningful for NoFlux.
double worst_boundary_ratio(const Trajectory& traj) {
  double worst = 0.0;
  for (const State& st : traj.snapshots) worst = std::max(worst, boundary_ratio(st.total()));
  return worst;
}

json run_summary(const Trajectory& traj) {
  const State& first = traj.snapshots.front();
  const State& last = traj.snapshots.back();
  auto drift = [](double a, double b) { return a == 0.0 ? std::abs(b) : std::abs(b - a) / std::abs(a); };
  return {{"steps", traj.steps},
          {"snapshots", traj.snapshots.size()},
          {"t_initial", first.t},
          {"t_final", last.t},
          {"clipped_mass", traj.clipped_mass},
          {"relative_mass_drift_u", drift(integrate(first.u), integrate(last.u))},
          {"relative_mass_drift_v", drift(integrate(first.v), integrate(last.v))},
          {"boundary_ratio", traj.grid.boundary == Boundary::NoFlux ? worst_boundary_ratio(traj) : 0.0}};
}

void write_profiles_svg(Sink& sink, const std::string& name, const State& st, const std::string& title,
                        const std::optional<Field>& exact = std::nullopt) {
  const GridSpec& g = st.grid();
  std::vector<double> xs(g.size());
  for (int i = 0; i < g.n_cells; ++i) xs[static_cast<std::size_t>(i)] = g.x(i);
  svg::LinePlot plot{title, "x", "density", false, {}};
  plot.series.push_back({"u", xs, st.u.raw()});
  plot.series.push_back({"v", xs, st.v.raw()});
  plot.series.push_back({"s", xs, st.total().raw()});
  if (exact) plot.series.push_back({"exact", xs, exact->raw()});
  sink.write(name, svg::render(plot));
}

std::vector<double> column(const CsvTable& table, const std::string& name) {
  std::vector<double> out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c] != name) continue;
    for (const auto& row : table.rows) out.push_back(row[c].value_or(std::nan("")));
  }
  return out;
}

Trajectory simulate(const RunConfig& cfg, std::ostream& log, const StepObserver& observer = {}) {
  const State initial = cfg.initial.build(cfg.grid, cfg.model.pressure.alpha);
  Trajectory traj = run(initial, cfg.model, cfg.solver, observer);
  if (cfg.grid.boundary == Boundary::NoFlux) {
    const double ratio = worst_boundary_ratio(traj);
    if (ratio > kBoundaryRatioLimit) {
      log << fmt::format("warning: boundary density reaches {:.3g} of the peak; widen the domain\n", ratio);
    }
  }
  return traj;
}

void body_run(const RunConfig& cfg, Sink& sink, std::ostream& log, int) {
  const Trajectory traj = simulate(cfg, log);
  log << fmt::format("run: {} steps to t = {}\n", traj.steps, traj.snapshots.back().t);
  const CsvTable diag = diagnostics_table(traj);
  if (sink.csv()) {
    sink.write("snapshots.csv", to_csv(snapshot_table(traj.snapshots)));
    sink.write("diagnostics.csv", to_csv(diag));
  }
  if (sink.json_enabled()) {
    json summary = run_summary(traj);
    summary["series"] = series_summary(diag);
    sink.write_json("summary.json", summary);
  }
  if (sink.svg()) {
    write_profiles_svg(sink, "profiles.svg", traj.snapshots.back(), fmt::format("densities at t = {:.4g}", traj.snapshots.back().t));
    const auto t = column(diag, "t");
    svg::LinePlot plot{"entropy and masses", "t", "value", false,
                       {{"entropy", t, column(diag, "entropy")},
                        {"mass_u", t, column(diag, "mass_u")},
                        {"mass_v", t, column(diag, "mass_v")}}};
    sink.write("diagnostics.svg", svg::render(plot));
  }
}

void body_diagnose(const RunConfig& cfg, Sink& sink, std::ostream& log, int) {
  EntropyMonitor monitor(cfg.model);
  std::vector<ResidualAccumulator> accumulators;
  std::optional<EnergyAccumulator> energy;
  const bool balance = !cfg.model.pressure.weighted();
  if (balance) {
    for (const LawSpec& law : cfg.diagnose.laws) {
      if (law.law == Law::EnergyIdentity) {
        energy.emplace(cfg.model);
        continue;
      }
      for (const TestFunction& phi : cfg.diagnose.test_functions) accumulators.emplace_back(cfg.model, law, phi, cfg.grid);
    }
  }
  const Trajectory traj = simulate(cfg, log, [&](const State& before, const State& after, double dt) {
    monitor(before, after, dt);
    for (auto& acc : accumulators) acc(before, after, dt);
    if (energy) (*energy)(before, after, dt);
  });
  log << fmt::format("diagnose: {} steps, max entropy residual {:.6g}\n", traj.steps, monitor.max_residual());

  const CsvTable diag = diagnostics_table(traj);
  CsvTable steps{{"t", "dt", "entropy_residual"}, {}};
  double t = traj.snapshots.front().t;
  double max_ratio = -INFINITY;
  for (std::size_t k = 0; k < monitor.residuals().size(); ++k) {
    const double dt = monitor.steps()[k];
    steps.rows.push_back({t, dt, monitor.residuals()[k]});
    max_ratio = std::max(max_ratio, monitor.residuals()[k] / dt);
    t += dt;
  }
  if (sink.csv()) {
    sink.write("diagnostics.csv", to_csv(diag));
    sink.write("entropy_steps.csv", to_csv(steps));
  }
  if (sink.json_enabled()) {
    json residuals = json::array();
    for (const auto& acc : accumulators) {
      const BalanceResidual r = acc.result();
      residuals.push_back({{"law", law_name(r.law)},
                           {"test_function", r.test_function_id},
                           {"value", r.value},
                           {"magnitude", r.magnitude}});
    }
    json summary = run_summary(traj);
    summary["series"] = series_summary(diag);
    summary["entropy_inequality"] = {{"max_step_residual", monitor.max_residual()},
                                     {"max_step_residual_over_dt", max_ratio},
                                     {"steps", monitor.residuals().size()}};
    summary["balance_residuals"] = residuals;
    if (energy) summary["energy_identity"] = {{"value", energy->value()}, {"magnitude", energy->magnitude()}};
    if (!balance) summary["balance_note"] = "weighted pressure: balance laws need the unit-weight reduction";
    sink.write_json("diagnostics.json", summary);
  }
  if (sink.svg()) {
    std::vector<double> ts, rs;
    for (const auto& row : steps.rows) {
      ts.push_back(*row[0]);
      rs.push_back(*row[2]);
    }
    sink.write("entropy_residual.svg", svg::render(svg::LinePlot{"entropy inequality residual per step", "t", "residual", false,
                                                                 {{"residual", ts, rs}}}));
    write_profiles_svg(sink, "profiles.svg", traj.snapshots.back(), fmt::format("densities at t = {:.4g}", traj.snapshots.back().t));
  }
}

SweepSpec sweep_spec(const RunConfig& cfg, int threads) {
  if (!cfg.sweep) throw DomainError("sweep needs a 'sweep' section with an eps_ladder");
  SweepSpec spec;
  spec.eps_ladder = cfg.sweep->eps_ladder;
  spec.grid_ladder = cfg.sweep->grid_ladder;
  spec.base_model = cfg.model;
  spec.grid = cfg.grid;
  const InitialSpec initial = cfg.initial;
  const double alpha = cfg.model.pressure.alpha;
  spec.initial = [initial, alpha](const GridSpec& g) { return initial.build(g, alpha); };
  spec.solver = cfg.solver;
  spec.snapshots = cfg.sweep->snapshots;
  spec.coarse = cfg.sweep->coarse;
  spec.mask = cfg.sweep->mask;
  spec.threads = threads;
  return spec;
}

CsvTable fluctuation_table(const SweepReport& report) {
  CsvTable table{{"rung", "epsilon", "t", "x", "samples", "m11", "m20", "m02", "slope", "cs_ratio", "f_local", "s_mean",
                  "in_s", "defect_lhs", "defect_rhs", "defect_gap"},
                 {}};
  for (std::size_t k = 0; k + 1 < report.rungs.size(); ++k) {
    const RungReport& r = report.rungs[k];
    for (std::size_t c = 0; c < r.stats.cells.size(); ++c) {
      const CellMoments& m = r.stats.cells[c];
      const DefectCell& d = r.defect[c];
      table.rows.push_back({static_cast<double>(k), r.epsilon, m.t_center, m.x_center, static_cast<double>(m.samples),
                            m.m11, m.m20, m.m02, m.slope, m.cs_ratio, m.f_local, m.s_mean, m.in_s ? 1.0 : 0.0, d.lhs,
                            d.rhs, d.gap()});
    }
  }
  return table;
}

void body_sweep(const RunConfig& cfg, Sink& sink, std::ostream& log, int threads) {
  const SweepReport report = eps_sweep(sweep_spec(cfg, threads));
  for (const auto& r : report.rungs) {
    log << fmt::format("eps {:.3g}: steps {}, |grad gap| {:.6g}, mean |m11| {:.6g}\n", r.epsilon, r.steps, r.dist_grad,
                       r.stats.mean_abs_m11());
  }
  if (sink.json_enabled()) sink.write_json("sweep_report.json", sweep_report_json(report));
  if (sink.csv()) sink.write("fluctuations.csv", to_csv(fluctuation_table(report)));
  if (sink.svg() && report.rungs.size() > 1) {
    const RungReport& coarsest = report.rungs.front();
    const FluctuationStats& st = coarsest.stats;
    svg::Heatmap map{fmt::format("cs_ratio, eps = {:.3g}", coarsest.epsilon),
                     "x",
                     "t",
                     st.time_cells,
                     st.space_cells,
                     cfg.grid.x_min,
                     cfg.grid.x_max,
                     report.times.front(),
                     report.times.front() + st.time_cells * report.window.dt,
                     {}};
    for (const auto& c : st.cells) map.values.push_back(c.cs_ratio.value_or(std::nan("")));
    sink.write("cs_ratio.svg", svg::render(map));

    const int row = st.time_cells / 2;
    std::vector<double> xs, slope, f;
    for (int j = 0; j < st.space_cells; ++j) {
      const CellMoments& c = st.cells[static_cast<std::size_t>(row * st.space_cells + j)];
      xs.push_back(c.x_center);
      slope.push_back(c.slope.value_or(std::nan("")));
      f.push_back(c.f_local);
    }
    sink.write("slope_vs_f.svg", svg::render(svg::LinePlot{fmt::format("slope and F at t = {:.3g}", st.cells[static_cast<std::size_t>(row * st.space_cells)].t_center),
                                                           "x", "value", false, {{"slope", xs, slope}, {"F_local", xs, f}}}));

    std::vector<double> eps, grad, u, s;
    for (std::size_t k = 0; k + 1 < report.rungs.size(); ++k) {
      eps.push_back(report.rungs[k].epsilon);
      grad.push_back(report.rungs[k].dist_grad);
      u.push_back(report.rungs[k].dist_u_masked);
      s.push_back(report.rungs[k].dist_s);
    }
    sink.write("ladder.svg", svg::render(svg::LinePlot{"distance to the finest rung", "epsilon", "L2 distance", true,
                                                       {{"grad s^alpha", eps, grad}, {"u on S", eps, u}, {"s", eps, s}}}));
  }
}

void body_oracle_check(const RunConfig& cfg, Sink& sink, std::ostream& log, int) {
  if (!cfg.oracle) throw DomainError("oracle-check needs an 'oracle' section or a heat, barenblatt or confined preset");
  const Trajectory traj = simulate(cfg, log);
  const auto rows = error_report(traj, *cfg.oracle);
  CsvTable table{{"t", "l1", "l2", "linf", "relative_l1"}, {}};
  double max_rel = 0.0;
  for (const auto& r : rows) {
    const double mass = exact_mass(*cfg.oracle, r.t);
    const double rel = r.l1 / mass;
    max_rel = std::max(max_rel, rel);
    table.rows.push_back({r.t, r.l1, r.l2, r.linf, rel});
  }
  const ErrorRow& last = rows.back();
  log << fmt::format("oracle-check: final L1 {:.6g}, L2 {:.6g}, Linf {:.6g}\n", last.l1, last.l2, last.linf);
  if (sink.csv()) sink.write("oracle_errors.csv", to_csv(table));
  if (sink.json_enabled()) {
    json summary = run_summary(traj);
    summary["final"] = {{"t", last.t}, {"l1", last.l1}, {"l2", last.l2}, {"linf", last.linf},
                        {"relative_l1", *table.rows.back()[4]}};
    summary["max_relative_l1"] = max_rel;
    if (const auto* b = std::get_if<Barenblatt>(&*cfg.oracle)) {
      const State& a = traj.snapshots.front();
      const State& z = traj.snapshots.back();
      const double ra = moment_radius(a.total(), b->alpha);
      const double rz = moment_radius(z.total(), b->alpha);
      summary["support_radius"] = {{"initial", ra},
                                   {"final", rz},
                                   {"exact_final", barenblatt_radius(*b, z.t)},
                                   {"growth_exponent", std::log(rz / ra) / std::log((z.t + b->t_offset) / (a.t + b->t_offset))},
                                   {"expected_exponent", 1.0 / (b->alpha + 1.0)}};
    }
    sink.write_json("oracle.json", summary);
  }
  if (sink.svg()) {
    const State& z = traj.snapshots.back();
    write_profiles_svg(sink, "oracle.svg", z, fmt::format("numerical vs exact at t = {:.4g}", z.t),
                       evaluate(*cfg.oracle, z.t, cfg.grid));
  }
}

}  // namespace

json sweep_report_json(const SweepReport& report) {
  json ladder = json::array();
  json columns = {{"epsilon", json::array()},      {"dist_s", json::array()},       {"dist_grad", json::array()},
                  {"dist_u_masked", json::array()}, {"dist_v_masked", json::array()}, {"mean_abs_m11", json::array()},
                  {"max_cs_ratio", json::array()},  {"mean_abs_defect_gap", json::array()}};
  bool decreasing = true;
  for (std::size_t k = 0; k < report.rungs.size(); ++k) {
    const RungReport& r = report.rungs[k];
    ladder.push_back({{"epsilon", r.epsilon},
                      {"steps", r.steps},
                      {"dist_s", r.dist_s},
                      {"dist_grad", r.dist_grad},
                      {"dist_u_masked", r.dist_u_masked},
                      {"dist_v_masked", r.dist_v_masked},
                      {"mean_abs_m11", r.stats.mean_abs_m11()},
                      {"max_cs_ratio", r.stats.max_cs_ratio()},
                      {"mean_abs_defect_gap", r.mean_abs_gap},
                      {"mean_abs_defect_lhs", r.mean_abs_lhs}});
    columns["epsilon"].push_back(r.epsilon);
    columns["dist_s"].push_back(r.dist_s);
    columns["dist_grad"].push_back(r.dist_grad);
    columns["dist_u_masked"].push_back(r.dist_u_masked);
    columns["dist_v_masked"].push_back(r.dist_v_masked);
    columns["mean_abs_m11"].push_back(r.stats.mean_abs_m11());
    columns["max_cs_ratio"].push_back(r.stats.max_cs_ratio());
    columns["mean_abs_defect_gap"].push_back(r.mean_abs_gap);
    if (k > 0 && k + 1 < report.rungs.size() && !(r.dist_grad < report.rungs[k - 1].dist_grad)) decreasing = false;
  }
  json grid = json::array();
  for (const auto& g : report.grid_study) grid.push_back({{"n_cells", g.n_cells}, {"dist_s_to_next", g.dist_s_to_next}});
  return {{"reference_epsilon", report.reference_epsilon},
          {"window", {{"dt", report.window.dt}, {"dx", report.window.dx}}},
          {"snapshots", report.times.size()},
          {"ladder", ladder},
          {"columns", columns},
          {"dist_grad_strictly_decreasing", decreasing},
          {"grid_study", grid}};
}

int cmd_run(const fs::path& config, const CommandOptions& options, std::ostream& log) {
  return execute("run", config, options, log, body_run);
}

int cmd_sweep(const fs::path& config, const CommandOptions& options, std::ostream& log) {
  return execute("sweep", config, options, log, body_sweep);
}

int cmd_diagnose(const fs::path& config, const CommandOptions& options, std::ostream& log) {
  return execute("diagnose", config, options, log, body_diagnose);
}

int cmd_oracle_check(const fs::path& config, const CommandOptions& options, std::ostream& log) {
  return execute("oracle-check", config, options, log, body_oracle_check);
}

}  // namespace crossdiff::cli
