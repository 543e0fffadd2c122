#pragma once

// Weak-form residuals of the entropy-type conservation laws, of the weak
// formulation of the limit system, and of the global energy identity.
//
// For a law d_t Q = d_x(Flux + H) + g the residual against phi is
//   sum_n sum_i (Q^{n+1} - Q^n) phi(t_{n+1/2}) dx
//     + sum_n dt_n sum_i [(Flux + H)^n d_x phi - g^n phi](t_{n+1/2}) dx,
// i.e. the time derivative is moved onto phi by summation by parts.

#include <optional>
#include <string>
#include <vector>

#include "crossdiff/model.hpp"
#include "crossdiff/solver.hpp"
#include "crossdiff/test_functions.hpp"

namespace crossdiff {

enum class Law { Entropy, RatioSquared, RatioTheta, WeakFormU, WeakFormV, EnergyIdentity };

struct LawSpec {
  Law law = Law::Entropy;
  double theta = 1.0;  ///< used by RatioTheta

  static LawSpec entropy() { return {Law::Entropy, 1.0}; }
  static LawSpec ratio_squared() { return {Law::RatioSquared, 1.0}; }
  static LawSpec ratio_theta(double theta) { return {Law::RatioTheta, theta}; }
  double effective_theta() const { return law == Law::RatioSquared ? 1.0 : theta; }
};

std::string law_name(const LawSpec& law);

struct BalanceResidual {
  LawSpec law;
  std::string test_function_id;
  double value = 0.0;
  /// Sum of the absolute values of the individual contributions, a natural scale for value.
  double magnitude = 0.0;
  int refinement_level = 0;
};

/// Pointwise densities, fluxes and sources of a law at one state (cell values).
struct LawTerms {
  Field density;
  Field flux;  ///< transport flux plus viscous flux
  Field source;
};
LawTerms law_terms(const State& state, const ModelSpec& model, const LawSpec& law);
Field law_density(const State& state, const LawSpec& law);

/// Accumulates a weak residual step by step; usable as a StepObserver (wrap with std::ref).
class ResidualAccumulator {
 public:
  /// Throws DomainError if the test function touches the spatial boundary, or for weighted pressure.
  ResidualAccumulator(ModelSpec model, LawSpec law, TestFunction phi, const GridSpec& grid);

  void operator()(const State& before, const State& after, double dt);
  BalanceResidual result(int refinement_level = 0) const;

 private:
  ModelSpec model_;
  LawSpec law_;
  TestFunction phi_;
  double value_ = 0.0;
  double magnitude_ = 0.0;
};

/// Global energy identity residual, streamed step by step.
class EnergyAccumulator {
 public:
  explicit EnergyAccumulator(ModelSpec model) : model_(std::move(model)) {}
  void operator()(const State& before, const State& after, double dt);
  double value() const { return value_ + boundary_term_; }
  double magnitude() const { return magnitude_; }

 private:
  ModelSpec model_;
  double value_ = 0.0;
  double magnitude_ = 0.0;
  double boundary_term_ = 0.0;
  std::optional<double> initial_energy_;
};

/// Residual of a conservation law over a trajectory; consecutive snapshots are treated as time steps.
BalanceResidual conservation_law_residual(const Trajectory& traj, const LawSpec& law, const TestFunction& phi);

enum class Species { U, V };
/// Residual of the epsilon-free weak formulation for one species.
double weak_solution_residual(const Trajectory& traj, const TestFunction& phi, Species species);
double energy_identity_residual(const Trajectory& traj);

}  // namespace crossdiff
