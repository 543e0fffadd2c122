#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "crossdiff/errors.hpp"
#include "crossdiff/solver.hpp"

using namespace crossdiff;

namespace {

double center_of_mass(const Field& f) {
  return integrate(map(f, [](double y, double x) { return x * y; })) / integrate(f);
}

double heat_kernel(double mass, double diffusivity, double t, double x) {
  return mass / std::sqrt(4.0 * std::numbers::pi * diffusivity * t) * std::exp(-x * x / (4.0 * diffusivity * t));
}

State random_state(const GridSpec& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  State st{0.0, Field(g), Field(g)};
  for (int i = 0; i < g.n_cells; ++i) {
    const double x = g.x(i);
    const double envelope = std::abs(x) < 0.6 * g.length() / 2.0 ? 1.0 : 0.0;
    st.u[static_cast<std::size_t>(i)] = envelope * (unit(rng) < 0.2 ? 0.0 : unit(rng));
    st.v[static_cast<std::size_t>(i)] = envelope * (unit(rng) < 0.2 ? 0.0 : unit(rng));
  }
  return st;
}

}  // namespace

TEST_CASE("stable_dt examples") {
  const GridSpec g{0.0, 1.0, 10, Boundary::Periodic};
  ModelSpec heat;
  heat.epsilon = 0.01;
  CHECK(stable_dt(State{0.0, Field(g), Field(g)}, heat, 0.5) == doctest::Approx(0.25).epsilon(1e-14));

  ModelSpec pme;
  CHECK(stable_dt(State{0.0, Field(g, 1.0), Field(g)}, pme, 0.5) == doctest::Approx(0.0025).epsilon(1e-14));

  const GridSpec n{-0.5, 0.5, 10, Boundary::NoFlux};
  CHECK(stable_dt(State{0.0, Field(n, 0.5), Field(n, 0.5)}, ModelSpec::demo(0.0), 0.5) ==
        doctest::Approx(0.0025).epsilon(1e-14));

  CHECK(stable_dt(State{0.9, Field(g, 1.0), Field(g)}, pme, 0.5, 0.901) == doctest::Approx(0.001).epsilon(1e-9));
}

TEST_CASE("step examples") {
  SUBCASE("constant state is stationary") {
    const GridSpec g{0.0, 1.0, 32, Boundary::Periodic};
    ModelSpec m;
    m.epsilon = 0.1;
    const State st{0.0, Field(g, 0.7), Field(g, 0.2)};
    const State next = step(st, m, stable_dt(st, m, 0.4));
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(next.u[i] == 0.7);
      CHECK(next.v[i] == 0.2);
    }
  }
  SUBCASE("an empty species stays empty") {
    const GridSpec g{-2.0, 2.0, 128, Boundary::NoFlux};
    ModelSpec m = ModelSpec::demo(1e-2);
    m.kernels.k12 = Kernel::gaussian(0.5, 0.2);
    m.g1 = GrowthLaw::logistic(1.0, 2.0);
    State st{0.0, Field(g), Field::from_function(g, [](double x) { return std::exp(-8.0 * x * x); })};
    for (int k = 0; k < 50; ++k) st = step(st, m, stable_dt(st, m, 0.4));
    for (double y : st.u.values()) CHECK(y == 0.0);
  }
  SUBCASE("one heat step matches the exact kernel to local truncation order") {
    // alpha = 1, eps = 0.05: linear diffusion with D = 1.05.
    const double diffusivity = 1.05;
    const double t_start = 0.1;
    auto local_error = [&](int n, double dt) {
      const GridSpec g{-4.0, 4.0, n, Boundary::NoFlux};
      ModelSpec m;
      m.pressure.alpha = 1.0;
      m.epsilon = 0.05;
      const State st{0.0, Field::from_function(g, [&](double x) { return heat_kernel(1.0, diffusivity, t_start, x); }),
                     Field(g)};
      const State next = step(st, m, dt);
      const Field exact = Field::from_function(g, [&](double x) { return heat_kernel(1.0, diffusivity, t_start + dt, x); });
      return lp_norm(next.u - exact, INFINITY);
    };
    // with dt = c dx^2 both dt^2 and dt dx^2 terms are O(dx^4)
    auto dt_of = [&](int n) { return 0.2 * (8.0 / n) * (8.0 / n) / diffusivity; };
    const double dx = 8.0 / 400;
    const double err = local_error(400, dt_of(400));
    CHECK(err <= 200.0 * dt_of(400) * dt_of(400) + 200.0 * dt_of(400) * dx * dx);
    const double ratio = err / local_error(800, dt_of(800));
    CHECK(ratio == doctest::Approx(16.0).epsilon(0.1));
  }
  SUBCASE("a step beyond the stable size is rejected") {
    const GridSpec g{-2.0, 2.0, 64, Boundary::NoFlux};
    const State st{0.0, Field::from_function(g, [](double x) { return std::abs(x) < 0.5 ? 1.0 : 0.0; }), Field(g)};
    ModelSpec m;
    CHECK_THROWS_AS(step(st, m, 100.0 * stable_dt(st, m, 1.0)), StabilityError);
  }
}

TEST_CASE("run examples") {
  SUBCASE("zero data") {
    const GridSpec g{-1.0, 1.0, 64, Boundary::NoFlux};
    SolverParams p;
    p.t_end = 0.1;
    const Trajectory traj = run(State{0.0, Field(g), Field(g)}, ModelSpec::demo(1e-3), p);
    REQUIRE(traj.snapshots.size() >= 2);
    for (const State& st : traj.snapshots) {
      CHECK(st.u.max() == 0.0);
      CHECK(st.v.max() == 0.0);
    }
    CHECK(traj.snapshots.back().t == doctest::Approx(0.1).epsilon(1e-14));
  }
  SUBCASE("demo system drifts u right and v left") {
    const GridSpec g{-2.0, 2.0, 256, Boundary::NoFlux};
    auto bump = [](double c) {
      return [c](double x) { return std::max(0.0, 1.0 - (x - c) * (x - c) / 0.25); };
    };
    const State init{0.0, Field::from_function(g, bump(-0.1)), Field::from_function(g, bump(0.1))};
    SolverParams p;
    p.t_end = 0.2;
    p.output_every = 1000000;
    const Trajectory traj = run(init, ModelSpec::demo(1e-3), p);
    const State& last = traj.snapshots.back();
    CHECK(center_of_mass(last.u) > center_of_mass(init.u));
    CHECK(center_of_mass(last.v) < center_of_mass(init.v));
  }
  SUBCASE("max steps") {
    const GridSpec g{-1.0, 1.0, 64, Boundary::NoFlux};
    SolverParams p;
    p.t_end = 1.0;
    p.max_steps = 5;
    const State init{0.0, Field(g, 1.0), Field(g)};
    CHECK_THROWS_AS(run(init, ModelSpec::demo(1e-3), p), MaxStepsExceeded);
  }
  SUBCASE("output interval lands on a uniform grid") {
    const GridSpec g{-1.0, 1.0, 64, Boundary::NoFlux};
    SolverParams p;
    p.t_end = 0.05;
    p.output_interval = 0.01;
    const State init{0.0, Field::from_function(g, [](double x) { return std::exp(-10.0 * x * x); }), Field(g)};
    const Trajectory traj = run(init, ModelSpec::demo(1e-2), p);
    REQUIRE(traj.snapshots.size() == 6);
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      CHECK(traj.snapshots[k].t == doctest::Approx(0.01 * static_cast<double>(k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: mass is conserved and densities stay nonnegative") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 12; ++trial) {
    const Boundary b = trial % 2 ? Boundary::Periodic : Boundary::NoFlux;
    const GridSpec g{-2.0, 2.0, 64 + 16 * trial, b};
    ModelSpec m = ModelSpec::demo(trial % 3 == 0 ? 0.0 : 1e-2);
    m.pressure.alpha = std::array{1.5, 2.0, 3.0}[static_cast<std::size_t>(trial % 3)];
    if (b == Boundary::Periodic) {
      m.v1 = Profile::zero();
      m.v2 = Profile::zero();
    }
    if (trial % 4 == 1) m.kernels.k21 = Kernel::gaussian(1.0, 0.3);
    for (Reconstruction r : {Reconstruction::Donor, Reconstruction::Minmod}) {
      const Stepper stepper(g, m, r);
      State st = random_state(g, rng);
      const double mu = integrate(st.u), mv = integrate(st.v);
      for (int k = 0; k < 200; ++k) {
        st = stepper.step(st, stepper.stable_dt(st, 0.4));
        REQUIRE(st.u.min() >= 0.0);
        REQUIRE(st.v.min() >= 0.0);
      }
      CHECK(std::abs(integrate(st.u) - mu) <= 1e-12 * mu);
      CHECK(std::abs(integrate(st.v) - mv) <= 1e-12 * mv);
    }
  }
}

TEST_CASE("property: exchanging the species labels commutes with the step") {
  std::mt19937 rng(9);
  const GridSpec g{-2.0, 2.0, 96, Boundary::NoFlux};
  ModelSpec m = ModelSpec::demo(5e-3);
  m.kernels.k12 = Kernel::gaussian(0.4, 0.2);
  m.g1 = GrowthLaw::logistic(1.0, 2.0);
  const ModelSpec swapped = swap_species(m);
  State a = random_state(g, rng);
  State b = swap_species(a);
  for (int k = 0; k < 100; ++k) {
    const double dt = stable_dt(a, m, 0.4);
    a = step(a, m, dt);
    b = step(b, swapped, dt);
  }
  CHECK(lp_norm(a.u - b.v, INFINITY) <= 1e-13);
  CHECK(lp_norm(a.v - b.u, INFINITY) <= 1e-13);
}

TEST_CASE("solver parameter validation") {
  SolverParams p;
  p.cfl = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.output_every = 0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = {};
  p.t_end = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}
