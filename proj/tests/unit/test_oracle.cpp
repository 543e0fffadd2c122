#include <cmath>
#include <numbers>

#include <doctest.h>

#include "crossdiff/errors.hpp"
#include "crossdiff/oracle.hpp"

using namespace crossdiff;

TEST_CASE("gaussian heat kernel normalisation") {
  const GaussianHeat g{1.0, 1.0, 0.0, 0.0};
  CHECK(evaluate_point(g, 1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(exact_mass(g, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(evaluate_point(g, 0.0, 0.0), DomainError);
}

TEST_CASE("barenblatt support grows like t^(1/3)") {
  const Barenblatt b{2.0, 1.0, 0.0};
  CHECK(barenblatt_radius(b, 8.0) / barenblatt_radius(b, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  const double r = barenblatt_radius(b, 1.0);
  CHECK(evaluate_point(b, 1.0, 0.999 * r) > 0.0);
  CHECK(evaluate_point(b, 1.0, 1.001 * r) == 0.0);
  CHECK_THROWS_AS(evaluate(b, 0.0, GridSpec{-1.0, 1.0, 8, Boundary::NoFlux}), DomainError);
}

TEST_CASE("barenblatt level for alpha = 2 and unit mass") {
  // mass = int (C - k y^2)_+ dy = 4 C^(3/2) / (3 sqrt k), k = 1/12
  const double k = 1.0 / 12.0;
  CHECK(barenblatt_shape_coefficient(2.0) == doctest::Approx(k).epsilon(1e-15));
  const double level = std::pow(3.0 * std::sqrt(k) / 4.0, 2.0 / 3.0);
  CHECK(barenblatt_level(2.0, 1.0) == doctest::Approx(level).epsilon(1e-13));
  // alpha = 3: (C - k y^2)^(1/2), mass = pi C / (2 sqrt k), k = 1/12
  CHECK(barenblatt_level(3.0, 1.0) == doctest::Approx(2.0 * std::sqrt(1.0 / 12.0) / std::numbers::pi).epsilon(1e-13));
}

TEST_CASE("property: barenblatt self-similar scaling") {
  for (double alpha : {1.5, 2.0, 3.0}) {
    const Barenblatt b{alpha, 0.7, 0.0};
    const double beta = 1.0 / (alpha + 1.0);
    for (double lambda : {2.0, 10.0}) {
      for (double t : {0.3, 1.0, 2.5}) {
        for (double x = -1.5; x <= 1.5; x += 0.05) {
          const double lhs = evaluate_point(b, lambda * t, std::pow(lambda, beta) * x) * std::pow(lambda, beta);
          const double rhs = evaluate_point(b, t, x);
          CHECK(std::abs(lhs - rhs) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("property: oracle mass is time independent") {
  const ExactSolution cases[] = {GaussianHeat{1.05, 2.0, 0.1, 0.3}, Barenblatt{2.0, 1.0, 0.0}, Barenblatt{3.0, 0.5, 0.2},
                                 ConfinedSteadyState{2.0, 1.0, 1.0}};
  for (const auto& sol : cases) {
    const double m1 = exact_mass(sol, 0.5);
    const double m2 = exact_mass(sol, 4.0);
    CHECK(std::abs(m1 - m2) <= 1e-10 * std::abs(m1));
  }
  CHECK(exact_mass(Barenblatt{2.0, 1.0, 0.0}, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("confined steady state level") {
  // (C - x^2/2)_+ has mass (4/3) sqrt(2) C^(3/2); unit mass gives C = (3 / (4 sqrt 2))^(2/3) ~ 0.655185
  const ConfinedSteadyState c{2.0, 1.0, 1.0};
  const double level = std::pow(3.0 / (4.0 * std::sqrt(2.0)), 2.0 / 3.0);
  CHECK(confined_level(c) == doctest::Approx(level).epsilon(1e-12));
  CHECK(level == doctest::Approx(0.655185).epsilon(1e-6));
  CHECK(evaluate_point(c, 0.0, 0.5) == doctest::Approx(level - 0.125).epsilon(1e-12));
  CHECK(evaluate_point(c, 0.0, 2.0) == 0.0);
}

TEST_CASE("moment radius recovers the support of a barenblatt profile") {
  const GridSpec g{-3.0, 3.0, 4096, Boundary::NoFlux};
  const Barenblatt b{2.0, 1.0, 0.0};
  const Field s = evaluate(b, 1.0, g);
  CHECK(moment_radius(s, 2.0) == doctest::Approx(barenblatt_radius(b, 1.0)).epsilon(1e-5));
  CHECK_THROWS_AS(moment_radius(Field(g), 2.0), DomainError);
  CHECK_THROWS_AS(moment_radius(s, 1.0), DomainError);
}

TEST_CASE("error_report") {
  const GridSpec g{-3.0, 3.0, 128, Boundary::NoFlux};
  const Barenblatt b{2.0, 1.0, 0.0};
  Trajectory traj;
  traj.grid = g;
  for (double t : {0.5, 0.75, 1.0}) traj.snapshots.push_back(State{t, evaluate(b, t, g), Field(g)});
  const auto rows = error_report(traj, b);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.l1 == 0.0);
    CHECK(r.l2 == 0.0);
    CHECK(r.linf == 0.0);
  }
  traj.snapshots[1].v[3] = 1.0;
  CHECK_THROWS_AS(error_report(traj, b), DomainError);
}
