#include <cmath>
#include <functional>
#include <numbers>

#include <doctest.h>

#include "crossdiff/balance.hpp"
#include "crossdiff/errors.hpp"
#include "crossdiff/oracle.hpp"

using namespace crossdiff;

namespace {

Trajectory sampled(const GridSpec& g, const ModelSpec& m, const ExactSolution& sol, double t0, double t1, int steps) {
  Trajectory traj;
  traj.grid = g;
  traj.model = m;
  for (int k = 0; k <= steps; ++k) {
    const double t = t0 + (t1 - t0) * k / steps;
    traj.snapshots.push_back(State{t, evaluate(sol, t, g), Field(g)});
  }
  return traj;
}

Trajectory constant(const GridSpec& g, const ModelSpec& m, double u, double v, int steps) {
  Trajectory traj;
  traj.grid = g;
  traj.model = m;
  for (int k = 0; k <= steps; ++k) traj.snapshots.push_back(State{0.1 * k, Field(g, u), Field(g, v)});
  return traj;
}

const TestFunction kInterior{"interior", Bump{0.5, 0.4}, Bump{0.0, 0.8}};

}  // namespace

TEST_CASE("zero and constant trajectories have zero residual") {
  const GridSpec g{-1.0, 1.0, 64, Boundary::NoFlux};
  ModelSpec m;
  m.epsilon = 0.01;
  const std::vector<LawSpec> laws{LawSpec::entropy(), LawSpec::ratio_squared(), LawSpec::ratio_theta(2.0)};
  for (const Trajectory& traj : {constant(g, m, 0.0, 0.0, 10), constant(g, m, 0.6, 0.3, 10)}) {
    for (const LawSpec& law : laws) {
      CHECK(conservation_law_residual(traj, law, kInterior).value == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    }
    CHECK(weak_solution_residual(traj, kInterior, Species::U) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(weak_solution_residual(traj, kInterior, Species::V) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(energy_identity_residual(traj) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  }
}

TEST_CASE("test functions touching the boundary are rejected") {
  const GridSpec g{-1.0, 1.0, 64, Boundary::NoFlux};
  const Trajectory traj = constant(g, ModelSpec{}, 0.1, 0.1, 10);
  const TestFunction wide{"wide", Bump{0.5, 0.4}, Bump{0.0, 1.0}};
  CHECK_THROWS_AS(conservation_law_residual(traj, LawSpec::entropy(), wide), DomainError);
  CHECK_THROWS_AS(weak_solution_residual(traj, wide, Species::U), DomainError);
  const TestFunction late{"late", Bump{0.9, 0.4}, Bump{0.0, 0.5}};
  CHECK_THROWS_AS(conservation_law_residual(traj, LawSpec::entropy(), late), DomainError);
}

TEST_CASE("weighted pressure must be reduced before balance checks") {
  const GridSpec g{-1.0, 1.0, 64, Boundary::NoFlux};
  ModelSpec m;
  m.pressure.weight_u = 2.0;
  CHECK_THROWS_AS(ResidualAccumulator(m, LawSpec::entropy(), kInterior, g), DomainError);
}

TEST_CASE("bump test functions") {
  const Bump b{1.0, 0.5};
  CHECK(b.value(1.0) == 1.0);
  CHECK(b.value(1.5) == 0.0);
  CHECK(b.value(0.4) == 0.0);
  for (double z = 0.55; z < 1.45; z += 0.05) {
    const double h = 1e-5;
    CHECK(b.derivative(z) == doctest::Approx((b.value(z + h) - b.value(z - h)) / (2 * h)).epsilon(1e-6));
    CHECK(b.second_derivative(z) ==
          doctest::Approx((b.derivative(z + h) - b.derivative(z - h)) / (2 * h)).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("heat weak residual is linear in epsilon") {
  // Exact kernels of diffusivity 1 + eps tested against the eps-free weak form of the unit-diffusivity equation:
  // the residual is eps * int int u phi_xx plus quadrature error.
  const GridSpec g{-6.0, 6.0, 1024, Boundary::NoFlux};
  ModelSpec m;
  m.pressure.alpha = 1.0;
  const TestFunction phi{"heat", Bump{0.5, 0.45}, Bump{0.3, 2.0}};
  std::vector<double> eps{0.05, 0.025, 0.0125};
  std::vector<double> residual;
  for (double e : eps) {
    const Trajectory traj = sampled(g, m, GaussianHeat{1.0 + e, 1.0, 0.1, 0.0}, 0.0, 1.0, 2000);
    residual.push_back(std::abs(weak_solution_residual(traj, phi, Species::U)));
  }
  // least-squares slope of log |r| against log eps
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    mx += std::log(eps[i]) / 3.0;
    my += std::log(residual[i]) / 3.0;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    sxy += (std::log(eps[i]) - mx) * (std::log(residual[i]) - my);
    sxx += (std::log(eps[i]) - mx) * (std::log(eps[i]) - mx);
  }
  const double slope = sxy / sxx;
  CHECK(slope >= 0.8);
  CHECK(slope <= 1.2);
}

TEST_CASE("barenblatt weak residual at n = 1024") {
  const GridSpec g{-3.0, 3.0, 1024, Boundary::NoFlux};
  ModelSpec m;
  m.epsilon = 1e-4;
  const Barenblatt b{2.0, 1.0, 0.0};
  const TestFunction phi{"unit", Bump{0.75, 0.24}, Bump{0.0, 1.0}};
  ResidualAccumulator acc(m, LawSpec{Law::WeakFormU, 1.0}, phi, g);
  SolverParams p;
  p.t_end = 1.0;
  p.output_every = 1000000;
  State init{0.5, evaluate(b, 0.5, g), Field(g)};
  run(init, m, p, std::ref(acc));
  CHECK(std::abs(acc.result().value) <= 1e-3);
}
