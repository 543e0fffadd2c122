// Acceptance runs. Prints one PASS/FAIL line per criterion; exit status is the number of failures.
// Usage: acceptance <path to crossdiff executable> [criterion numbers...]

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "config.hpp"
#include "crossdiff/balance.hpp"
#include "crossdiff/continuation.hpp"
#include "crossdiff/diagnostics.hpp"
#include "crossdiff/io.hpp"
#include "crossdiff/oracle.hpp"
#include "crossdiff/solver.hpp"

using namespace crossdiff;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

double bump3(double x, double center, double half_width) {
  const double z = (x - center) / half_width;
  return std::abs(z) < 1.0 ? std::pow(1.0 - z * z, 3) : 0.0;
}

State demo_initial(const GridSpec& g) {
  return State{0.0, Field::from_function(g, [](double x) { return bump3(x, -0.25, 0.75); }),
               Field::from_function(g, [](double x) { return bump3(x, 0.25, 0.75); })};
}

double relative_l1(const Field& a, const Field& b) { return lp_norm(a - b, 1.0) / lp_norm(b, 1.0); }

std::string join(const std::vector<double>& xs, const char* format = "{:.4g}") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt::format(fmt::runtime(format), xs[i]);
  }
  return out;
}

bool strictly_decreasing(const std::vector<double>& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] < xs[i - 1])) return false;
  }
  return true;
}

// 1. Mass drift of every G = 0 preset over 10^4 steps at n = 1024.
Outcome mass_conservation() {
  double worst = 0.0;
  std::string detail;
  for (const char* preset : {"demo", "heat", "barenblatt", "confined"}) {
    const cli::RunConfig cfg = cli::parse_config(json{{"model", {{"preset", preset}}}, {"grid", {{"n_cells", 1024}}}});
    const Stepper stepper(cfg.grid, cfg.model, cfg.solver.reconstruction);
    State st = cfg.initial.build(cfg.grid, cfg.model.pressure.alpha);
    const double mu = integrate(st.u), mv = integrate(st.v);
    State next = st;
    for (int k = 0; k < 10000; ++k) {
      stepper.step_into(st, stepper.stable_dt(st, cfg.solver.cfl), next);
      std::swap(st, next);
    }
    auto drift = [](double before, double after) {
      return before > 0.0 ? std::abs(after - before) / before : std::abs(after - before);
    };
    const double d = std::max(drift(mu, integrate(st.u)), drift(mv, integrate(st.v)));
    worst = std::max(worst, d);
    detail += fmt::format("{} {:.2e}; ", preset, d);
  }
  return {worst <= 1e-12, detail + fmt::format("max relative drift {:.2e} <= 1e-12", worst)};
}

// 2. Heat oracle: L2 error ratio between n = 256 and 512.
Outcome heat_oracle() {
  const GaussianHeat exact{1.05, 1.0, 0.1, 0.0};
  std::vector<double> errors;
  for (int n : {256, 512}) {
    const GridSpec g{-6.0, 6.0, n, Boundary::NoFlux};
    ModelSpec m;
    m.pressure.alpha = 1.0;
    m.epsilon = 0.05;
    SolverParams p;
    p.t_end = 0.5;
    p.output_every = 1000000;
    const Trajectory traj = run(State{0.0, evaluate(exact, 0.0, g), Field(g)}, m, p);
    errors.push_back(error_report(traj, exact).back().l2);
  }
  const double ratio = errors[0] / errors[1];
  return {ratio >= 3.2 && ratio <= 4.8,
          fmt::format("L2 errors {} ; ratio {:.3f} in [3.2, 4.8]", join(errors, "{:.3e}"), ratio)};
}

// 3. Barenblatt from t = 0.5 to 1: relative L1 error and support growth exponent.
Outcome barenblatt() {
  const Barenblatt exact{2.0, 1.0, 0.0};
  const GridSpec g{-3.0, 3.0, 1024, Boundary::NoFlux};
  ModelSpec m;
  m.epsilon = 1e-4;
  SolverParams p;
  p.t_end = 1.0;
  p.output_interval = 0.05;
  const Trajectory traj = run(State{0.5, evaluate(exact, 0.5, g), Field(g)}, m, p);
  const State& last = traj.snapshots.back();
  const double l1 = relative_l1(last.u, evaluate(exact, last.t, g));
  // least-squares slope of log R against log t
  std::vector<double> lt, lr;
  for (const State& st : traj.snapshots) {
    lt.push_back(std::log(st.t));
    lr.push_back(std::log(moment_radius(st.u, 2.0)));
  }
  double mt = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    mt += lt[i] / static_cast<double>(lt.size());
    mr += lr[i] / static_cast<double>(lt.size());
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    sxy += (lt[i] - mt) * (lr[i] - mr);
    sxx += (lt[i] - mt) * (lt[i] - mt);
  }
  const double exponent = sxy / sxx;
  const double exponent_error = std::abs(exponent - 1.0 / 3.0) / (1.0 / 3.0);
  return {l1 <= 0.02 && exponent_error <= 0.05,
          fmt::format("relative L1 {:.3e} <= 2e-2; radius exponent {:.5f} (off 1/3 by {:.2f}%) <= 5%", l1, exponent,
                      100.0 * exponent_error)};
}

// 4. Confined steady state from a box on |x| < 0.5, V = x^2/2 for both species.
Outcome confined() {
  const GridSpec g{-2.0, 2.0, 256, Boundary::NoFlux};
  ModelSpec m;
  m.v1 = Profile::quadratic(1.0);
  m.v2 = Profile::quadratic(1.0);
  const Field box = Field::from_function(g, [](double x) { return std::abs(x) < 0.5 ? 1.0 : 0.0; });
  SolverParams p;
  p.t_end = 20.0;
  p.output_every = 1000000;
  const Trajectory traj = run(State{0.0, box, Field(g)}, m, p);
  const ConfinedSteadyState exact{2.0, 1.0, integrate(box)};
  const double l1 = relative_l1(traj.snapshots.back().total(), evaluate(exact, 20.0, g));
  return {l1 <= 0.01, fmt::format("relative L1 at t = 20: {:.3e} <= 1e-2 (level C = {:.6f})", l1, confined_level(exact))};
}

// 5. Per-step entropy residual on the demo system, r_n <= C dt_n with C = 0 from the refinement study.
Outcome entropy_inequality() {
  constexpr double kSlack = 0.0;
  const GridSpec g{-2.0, 2.0, 512, Boundary::NoFlux};
  const ModelSpec m = ModelSpec::demo(1e-3);
  EntropyMonitor monitor(m);
  SolverParams p;
  p.t_end = 0.5;
  p.output_every = 1000000;
  run(demo_initial(g), m, p, std::ref(monitor));
  std::size_t violations = 0;
  double worst = -INFINITY;
  for (std::size_t k = 0; k < monitor.residuals().size(); ++k) {
    const double r = monitor.residuals()[k];
    const double dt = monitor.steps()[k];
    if (r > kSlack * dt) ++violations;
    worst = std::max(worst, r / dt);
  }
  return {violations == 0, fmt::format("{} steps, {} above slack; max residual {:.3e}, max residual/dt {:.3e}",
                                       monitor.residuals().size(), violations, monitor.max_residual(), worst)};
}

// 8. Weak residuals of three laws against three bumps under (dx, dt) -> (dx/2, dt/4).
Outcome conservation_laws() {
  const std::vector<TestFunction> bumps{
      {"a", Bump{0.25, 0.2}, Bump{-0.5, 0.5}}, {"b", Bump{0.25, 0.2}, Bump{0.0, 0.5}}, {"c", Bump{0.25, 0.2}, Bump{0.6, 0.4}}};
  const std::vector<LawSpec> laws{LawSpec::entropy(), LawSpec::ratio_squared(), LawSpec::ratio_theta(2.0)};
  std::vector<std::vector<double>> residuals;
  for (const auto& [n, dt] : std::vector<std::pair<int, double>>{{256, 6.25e-5}, {512, 1.5625e-5}}) {
    const GridSpec g{-3.0, 3.0, n, Boundary::NoFlux};
    const ModelSpec m = ModelSpec::demo(0.01);
    std::vector<ResidualAccumulator> accumulators;
    for (const LawSpec& law : laws) {
      for (const TestFunction& phi : bumps) accumulators.emplace_back(m, law, phi, g);
    }
    SolverParams p;
    p.t_end = 0.5;
    p.fixed_dt = dt;
    p.output_every = 1000000;
    run(demo_initial(g), m, p, [&](const State& a, const State& b, double step) {
      for (auto& acc : accumulators) acc(a, b, step);
    });
    std::vector<double> level;
    for (const auto& acc : accumulators) level.push_back(acc.result().value);
    residuals.push_back(level);
  }
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < residuals[0].size(); ++i) {
    const double rate = std::log2(std::abs(residuals[0][i]) / std::abs(residuals[1][i]));
    pass = pass && rate >= 1.0;
    detail += fmt::format("{}/{} {:.2f}; ", law_name(laws[i / 3]), bumps[i % 3].id, rate);
  }
  return {pass, "rates " + detail + "all >= 1"};
}

// 9. Weighted pressure (2, 1) solved directly vs the unit-weight reduction on the scaled unknowns.
Outcome weighted_reduction_check() {
  const GridSpec g{-2.0, 2.0, 256, Boundary::NoFlux};
  ModelSpec weighted = ModelSpec::demo(1e-3);
  weighted.pressure.weight_u = 2.0;
  weighted.pressure.weight_v = 1.0;
  weighted.kernels.k11 = Kernel::gaussian(0.5, 0.2);
  weighted.kernels.k12 = Kernel::gaussian(-0.3, 0.3);
  weighted.kernels.k21 = Kernel::gaussian(0.2, 0.25);
  const ModelSpec reduced = weighted_reduction(weighted);
  const Stepper direct(g, weighted);
  const Stepper standard(g, reduced);
  State a = demo_initial(g);
  State b{0.0, 2.0 * a.u, a.v};
  double worst = 0.0;
  int steps = 0;
  while (a.t < 0.1) {
    const double dt = direct.stable_dt(a, 0.4);
    a = direct.step(a, dt);
    b = standard.step(b, dt);
    worst = std::max({worst, lp_norm(a.u - 0.5 * b.u, INFINITY), lp_norm(a.v - b.v, INFINITY)});
    ++steps;
  }
  return {worst <= 1e-12, fmt::format("{} steps, max per-step difference {:.3e} <= 1e-12", steps, worst)};
}

struct SweepRuns {
  bool ok = false;
  std::string error;
  json report;
  bool identical = false;
  std::string comparison;
};

// 6, 7 and 10 share one CLI sweep at n = 1024, run once with 1 thread and once with 8.
SweepRuns& sweep_runs(const fs::path& tool) {
  static SweepRuns runs = [&] {
    SweepRuns out;
    const fs::path dir = fs::temp_directory_path() / "crossdiff_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_atomic(dir / "sweep.json", json{{"description", "demo ladder"},
                                          {"grid", {{"x_min", -2.0}, {"x_max", 2.0}, {"n_cells", 1024}}},
                                          {"model", {{"preset", "demo"}}},
                                          {"solver", {{"t_end", 0.5}}},
                                          {"sweep", {{"eps_ladder", {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}}}}}
                                         .dump(2));
    for (int threads : {1, 8}) {
      const std::string cmd = fmt::format("\"{}\" sweep --config \"{}\" --out \"{}\" --threads {} > \"{}\" 2>&1",
                                          tool.string(), (dir / "sweep.json").string(),
                                          (dir / fmt::format("t{}", threads)).string(), threads,
                                          (dir / fmt::format("t{}.log", threads)).string());
      const int status = std::system(cmd.c_str());
      if (status != 0) {
        out.error = fmt::format("sweep with {} threads exited with status {}", threads, status);
        return out;
      }
    }
    out.ok = true;
    out.report = json::parse(read_text(dir / "t1" / "sweep_report.json"));
    out.identical = true;
    for (const char* file : {"sweep_report.json", "fluctuations.csv", "cs_ratio.svg", "slope_vs_f.svg", "ladder.svg"}) {
      const bool same = read_text(dir / "t1" / file) == read_text(dir / "t8" / file);
      out.identical = out.identical && same;
      out.comparison += fmt::format("{} {}; ", file, same ? "identical" : "DIFFERENT");
    }
    return out;
  }();
  return runs;
}

std::vector<double> column(const json& report, const char* name) {
  return report["columns"][name].get<std::vector<double>>();
}

Outcome ladder_cauchy(const fs::path& tool) {
  const SweepRuns& runs = sweep_runs(tool);
  if (!runs.ok) return {false, runs.error};
  // the reference rung has distance 0 by construction and is excluded
  auto non_reference = [](std::vector<double> xs) {
    xs.pop_back();
    return xs;
  };
  const auto grad = non_reference(column(runs.report, "dist_grad"));
  const auto u = non_reference(column(runs.report, "dist_u_masked"));
  return {strictly_decreasing(grad) && strictly_decreasing(u),
          fmt::format("grad distances [{}], masked u distances [{}] strictly decreasing", join(grad), join(u))};
}

Outcome young_measure(const fs::path& tool) {
  const SweepRuns& runs = sweep_runs(tool);
  if (!runs.ok) return {false, runs.error};
  const auto m11 = column(runs.report, "mean_abs_m11");
  const auto cs = column(runs.report, "max_cs_ratio");
  const double contraction = m11.front() / m11[m11.size() - 2];
  double cs_max = 0.0;
  for (double c : cs) cs_max = std::max(cs_max, c);
  return {contraction >= 2.0 && cs_max <= 1.0 + 1e-12,
          fmt::format("mean |m11| coarsest / second-finest = {:.4e} / {:.4e} = {:.1f} >= 2; max cs_ratio {:.15f} <= 1 + 1e-12",
                      m11.front(), m11[m11.size() - 2], contraction, cs_max)};
}

Outcome determinism(const fs::path& tool) {
  const SweepRuns& runs = sweep_runs(tool);
  if (!runs.ok) return {false, runs.error};
  return {runs.identical, "threads 1 vs 8: " + runs.comparison};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <crossdiff executable> [criteria...]\n";
    return 2;
  }
  const fs::path tool = fs::absolute(argv[1]);
  std::set<int> selected;
  for (int i = 2; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  const std::vector<Criterion> criteria{
      {1, "mass conservation", 10.0, mass_conservation},
      {2, "heat oracle second order", 10.0, heat_oracle},
      {3, "Barenblatt profile and support growth", 30.0, barenblatt},
      {4, "confined steady state", 60.0, confined},
      {5, "entropy inequality per step", 30.0, entropy_inequality},
      {6, "epsilon-ladder Cauchy distances", 300.0, [&] { return ladder_cauchy(tool); }},
      {7, "Young-measure contraction", 300.0, [&] { return young_measure(tool); }},
      {8, "conservation-law residual rates", 120.0, conservation_laws},
      {9, "weighted-pressure reduction", 10.0, weighted_reduction_check},
      {10, "thread-count determinism", 600.0, [&] { return determinism(tool); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.body();
    } catch (const std::exception& e) {
      outcome = {false, fmt::format("threw: {}", e.what())};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= c.budget_seconds;
    const bool pass = outcome.pass && in_budget;
    if (!pass) ++failures;
    std::cout << fmt::format("[{}] {:>2} {}: {} ({:.1f} s, budget {:.0f} s)", pass ? "PASS" : "FAIL", c.id, c.name,
                             outcome.detail, seconds, c.budget_seconds)
              << std::endl;
  }
  std::cout << fmt::format("{} criteria failed", failures) << std::endl;
  return failures;
}
