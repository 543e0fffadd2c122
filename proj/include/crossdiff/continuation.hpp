#pragma once

// Epsilon-ladder continuation: runs a family of viscous problems, treats the
// finest rung as the reference, and measures space-time Cauchy distances and
// coarse-grained fluctuation moments against it.

#include <functional>
#include <optional>
#include <vector>

#include "crossdiff/domain.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

struct CoarseWindow {
  double dt = 0.0;  ///< 0 selects t_end / 20
  double dx = 0.0;  ///< 0 selects domain length / 50
};

struct MaskTolerances {
  double s_rel = 1e-8;  ///< s_tol = s_rel * max s
  double v_rel = 1e-6;  ///< v_tol = v_rel * max |d_x V|
};

struct SweepSpec {
  std::vector<double> eps_ladder;  ///< strictly decreasing, at least 3 rungs; the last is the reference
  std::vector<int> grid_ladder;    ///< optional n_cells values for a grid-refinement study at the reference epsilon
  ModelSpec base_model;
  GridSpec grid;
  std::function<State(const GridSpec&)> initial;  ///< evaluated on grid and on every grid_ladder entry
  SolverParams solver;  ///< t_end, cfl, reconstruction; output cadence is overridden
  int snapshots = 200;  ///< uniform output times shared by every rung
  CoarseWindow coarse;
  MaskTolerances mask;
  int threads = 1;

  /// Throws DomainError on an invalid ladder or window.
  void validate() const;
};

/// Moments of one coarse space-time cell.
struct CellMoments {
  double t_center = 0.0;
  double x_center = 0.0;
  int samples = 0;
  double m11 = 0.0;
  double m20 = 0.0;
  double m02 = 0.0;
  std::optional<double> slope;     ///< m11 / m20
  std::optional<double> cs_ratio;  ///< m11^2 / (m20 m02)
  double f_local = 0.0;            ///< alpha * mean s_ref * mean d_x(V2 - V1)_ref
  double s_mean = 0.0;
  bool in_s = true;
};

struct FluctuationStats {
  int time_cells = 0;
  int space_cells = 0;
  std::vector<CellMoments> cells;  ///< row-major, time outer

  double mean_abs_m11() const;
  double max_cs_ratio() const;
};

/// Coarse-cell moments of paired sample fields laid out as [snapshot][cell].
/// Used directly by tests with synthetic fields.
inline constexpr double kMomentTolerance = 1e-24;
void accumulate_moments(FluctuationStats& stats, const std::vector<std::vector<double>>& lambda1,
                        const std::vector<std::vector<double>>& lambda2, const std::vector<double>& times,
                        const GridSpec& grid, const CoarseWindow& window, double t_end);

struct DefectCell {
  double t_center = 0.0;
  double x_center = 0.0;
  double lhs = 0.0;  ///< mean |d_x s_eps^alpha - d_x s_ref^alpha|^2
  double rhs = 0.0;  ///< alpha * mean(u_eps d_x s_eps^alpha - u_ref d_x s_ref^alpha) * mean d_x(V2 - V1)_ref
  double gap() const { return lhs - rhs; }
};

struct RungReport {
  double epsilon = 0.0;
  long long steps = 0;
  double dist_s = 0.0;
  double dist_grad = 0.0;  ///< || d_x s_eps^alpha - d_x s_ref^alpha ||
  double dist_u_masked = 0.0;
  double dist_v_masked = 0.0;
  FluctuationStats stats;
  std::vector<DefectCell> defect;
  double mean_abs_gap = 0.0;
  double mean_abs_lhs = 0.0;
};

struct GridRow {
  int n_cells = 0;
  double dist_s_to_next = 0.0;  ///< on the coarser grid, after averaging the next finer one
};

struct SweepReport {
  double reference_epsilon = 0.0;
  CoarseWindow window;
  std::vector<double> times;
  std::vector<RungReport> rungs;  ///< one per ladder entry, the reference last (all distances 0)
  std::vector<GridRow> grid_study;
};

/// Reference-run mask over coarse cells: true where the cell belongs to S.
std::vector<bool> set_s_mask(const std::vector<State>& reference, const ModelSpec& model, const CoarseWindow& window,
                             double t_end, const MaskTolerances& tol);

/// Moments of (u_eps/s_eps - u_ref/s_ref, d_x s_eps^alpha - d_x s_ref^alpha) over coarse cells.
/// Throws DomainError when run and reference differ in grid or snapshot times.
FluctuationStats fluctuation_stats(const Trajectory& run, const Trajectory& reference, const CoarseWindow& window,
                                   const ModelSpec& model, const MaskTolerances& tol = {});

std::vector<DefectCell> defect_cells(const Trajectory& run, const Trajectory& reference, const CoarseWindow& window,
                                     const ModelSpec& model);

/// Space-time L2 distance with trapezoid weights in time over matching snapshots.
double spacetime_distance(const std::vector<Field>& a, const std::vector<Field>& b, const std::vector<double>& times);

SweepReport eps_sweep(const SweepSpec& spec);

/// Per-rung defect fields of a completed sweep (reference rung excluded).
std::vector<std::vector<DefectCell>> defect_measure_check(const SweepReport& report);

/// Resolves zero entries of a window against a trajectory span and domain.
CoarseWindow resolve_window(const CoarseWindow& window, double t_span, const GridSpec& grid);

}  // namespace crossdiff
