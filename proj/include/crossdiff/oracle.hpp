#pragma once

// Closed-form reference solutions of single-species reductions.

#include <variant>
#include <vector>

#include "crossdiff/domain.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

/// Heat kernel M / sqrt(4 pi D (t + t0)) exp(-(x - x0)^2 / (4 D (t + t0))).
struct GaussianHeat {
  double diffusivity = 1.0;
  double mass = 1.0;
  double t_offset = 0.0;
  double center = 0.0;
};

/// Self-similar solution of d_t s = (1/alpha) d_xx s^alpha with the given mass, at time t + t_offset.
struct Barenblatt {
  double alpha = 2.0;
  double mass = 1.0;
  double t_offset = 0.0;
};

/// Stationary state of d_t s = d_x(s d_x(p(s) + V)) for V = c x^2 / 2: p(s) + V = C on the support.
struct ConfinedSteadyState {
  double alpha = 2.0;
  double curvature = 1.0;
  double mass = 1.0;
};

using ExactSolution = std::variant<GaussianHeat, Barenblatt, ConfinedSteadyState>;

double evaluate_point(const ExactSolution& sol, double t, double x);
/// Cell-midpoint samples. Throws DomainError for t + t_offset <= 0 on self-similar profiles.
Field evaluate(const ExactSolution& sol, double t, const GridSpec& grid);

/// Level C of the Barenblatt profile (C - k y^2)_+^(1/(alpha-1)), k = (alpha-1)/(2 alpha (alpha+1)).
double barenblatt_level(double alpha, double mass);
double barenblatt_shape_coefficient(double alpha);
/// Support half-width of the Barenblatt solution at time t (offset included).
double barenblatt_radius(const Barenblatt& b, double t);
/// Support half-width of a centred Barenblatt-shaped density inferred from its second moment:
/// for (C - k x^2)_+^q the ratio int x^2 s / int s equals R^2 / (2q + 3).
double moment_radius(const Field& s, double alpha);
/// The constant C of the confined steady state, from root-finding on the mass.
double confined_level(const ConfinedSteadyState& c);
/// Total mass by adaptive quadrature over the support.
double exact_mass(const ExactSolution& sol, double t);

struct ErrorRow {
  double t;
  double l1;
  double l2;
  double linf;
};

/// Per-snapshot norms of s_num - s_exact. Throws DomainError if any snapshot carries a second species.
std::vector<ErrorRow> error_report(const Trajectory& traj, const ExactSolution& sol);

}  // namespace crossdiff
