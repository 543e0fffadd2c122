#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "crossdiff/domain.hpp"
#include "crossdiff/model.hpp"

namespace crossdiff {

enum class Reconstruction { Donor, Minmod };

struct SolverParams {
  double cfl = 0.4;
  double t_end = 1.0;
  int output_every = 1;
  long long max_steps = 10'000'000;
  double positivity_floor = 0.0;
  /// When > 0, snapshots are taken on the uniform time grid k * output_interval
  /// (steps are shortened to land on it) instead of every output_every steps.
  double output_interval = 0.0;
  /// When > 0, every step uses this dt (the last one is shortened to hit t_end).
  double fixed_dt = 0.0;
  Reconstruction reconstruction = Reconstruction::Minmod;

  void validate() const;
};

struct Trajectory {
  GridSpec grid;
  ModelSpec model;
  std::vector<State> snapshots;
  std::vector<double> dt_history;
  double clipped_mass = 0.0;
  long long steps = 0;
};

/// Called after every accepted step with the states on both ends of it.
using StepObserver = std::function<void(const State& before, const State& after, double dt)>;

/// Precomputed, grid-bound discretisation of one model. Holds scratch buffers,
/// so one instance must not be stepped from two threads at once.
class Stepper {
 public:
  Stepper(const GridSpec& grid, const ModelSpec& model, Reconstruction reconstruction = Reconstruction::Minmod);

  double stable_dt(const State& state, double cfl) const;
  /// One forward-Euler step. Negative values in [-floor, 0) are clipped and their mass added to *clipped.
  State step(const State& state, double dt, double positivity_floor = 0.0, double* clipped = nullptr) const;
  void step_into(const State& state, double dt, State& out, double positivity_floor = 0.0,
                 double* clipped = nullptr) const;

  /// Interface values of d/dx of the aggregated potentials (entry j between cells j and j+1).
  std::pair<std::vector<double>, std::vector<double>> face_velocities(const State& state) const;

  const GridSpec& grid() const { return grid_; }
  const ModelSpec& model() const { return model_; }

 private:
  // One-way transfers per cell. Every interface moves a nonnegative amount out
  // of one cell into its neighbour and the update is (value - loss) + gain, so
  // a cell cannot go negative while its losses stay below its content.
  struct Transfers {
    std::vector<double> loss, gain;
    void clear() {
      std::fill(loss.begin(), loss.end(), 0.0);
      std::fill(gain.begin(), gain.end(), 0.0);
    }
    void move(int from, int to, double amount) {
      loss[static_cast<std::size_t>(from)] += amount;
      gain[static_cast<std::size_t>(to)] += amount;
    }
  };
  struct Workspace {
    std::vector<double> total, power, frac_u, frac_v, slope_fu, slope_fv, slope_u, slope_v, a1, a2;
    Transfers lu, lv;
    void resize(std::size_t n) {
      for (auto* v : {&total, &power, &frac_u, &frac_v, &slope_fu, &slope_fv, &slope_u, &slope_v, &lu.loss, &lu.gain,
                      &lv.loss, &lv.gain}) {
        v->resize(n);
      }
    }
  };

  void face_velocities_into(const State& state, std::vector<double>& a1, std::vector<double>& a2) const;

  mutable Workspace ws_;
  GridSpec grid_;
  ModelSpec model_;
  Reconstruction reconstruction_;
  std::vector<double> dv1_face_, dv2_face_;
  SampledKernel k11_, k12_, k21_, k22_;
  bool kernels_ = false;
};

double stable_dt(const State& state, const ModelSpec& model, double cfl,
                 double t_end = std::numeric_limits<double>::infinity());
State step(const State& state, const ModelSpec& model, double dt, double positivity_floor = 0.0);

/// Integrates to params.t_end. Throws StabilityError, MaxStepsExceeded.
Trajectory run(const State& initial, const ModelSpec& model, const SolverParams& params,
               const StepObserver& observer = {});

State swap_species(const State& state);

}  // namespace crossdiff
