#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crossdiff/domain.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

struct NormTriple {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// Scalar functionals of one state. Squared-gradient entries use two-point
/// interface differences; entries marked optional are only meaningful in a
/// range of alpha and are left empty outside it.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double moment1_s = 0.0;  ///< int |x| s
  NormTriple norms_u, norms_v;
  double entropy = 0.0;         ///< int u log u + v log v, with 0 log 0 = 0
  double entropy_moment = 0.0;  ///< int (|u log u| + |v log v|) |x|^(1/2)
  double grad_s_alpha_half_sq = 0.0;
  double grad_s_alpha_sq = 0.0;
  double eps_grad_sqrt_u_sq = 0.0;
  double eps_grad_sqrt_v_sq = 0.0;
  double eps_grad_u_sq = 0.0;
  double eps_grad_v_sq = 0.0;
  std::optional<double> grad_s_sq;       ///< alpha <= 2
  std::optional<double> fast_diff_grad;  ///< int |d_x s^(1-alpha)|, alpha <= 1/3
  double linf_s = 0.0;
  /// int (rho log rho + rho |x|) per species and the matching pointwise lower bound -(2/e) int e^(-|x|/2).
  double log_compensated_u = 0.0;
  double log_compensated_v = 0.0;
  double log_lower_bound = 0.0;
  /// Smallest cellwise margin rho log rho + rho |x| + (2/e) e^(-|x|/2) over both species.
  double log_pointwise_margin = 0.0;
};

DiagnosticsRecord record(const State& state, const ModelSpec& model);

/// Column names in the order used by diagnostics_row.
std::vector<std::string> diagnostics_columns();
std::vector<std::optional<double>> diagnostics_row(const DiagnosticsRecord& r);

/// dx * sum over interfaces of ((f_{j+1} - f_j)/dx)^2; wall interfaces excluded for NoFlux.
double interface_gradient_sq(const Field& f);
/// dx * sum over interfaces of |f_{j+1} - f_j| / dx.
double interface_total_variation(const Field& f);

/// Right-hand bound of the entropy inequality at one state:
/// (max|d_xx V1| + max|d_xx V2|) M plus the growth contribution.
double entropy_bound(const State& state, const ModelSpec& model);

/// Entropy inequality residual of one interval, from the left endpoint's dissipation terms:
/// dH/dt + (4/alpha^2) |d_x s^(alpha/2)|^2 + 4 eps (|d_x sqrt u|^2 + |d_x sqrt v|^2) - C_bound.
double entropy_interval_residual(const State& before, const State& after, double dt, const ModelSpec& model);

/// Per-interval residuals over consecutive snapshots.
std::vector<double> entropy_dissipation_check(const Trajectory& traj);

/// Streaming form of entropy_dissipation_check, usable as a StepObserver.
class EntropyMonitor {
 public:
  explicit EntropyMonitor(ModelSpec model) : model_(std::move(model)) {}
  void operator()(const State& before, const State& after, double dt);

  const std::vector<double>& residuals() const { return residuals_; }
  const std::vector<double>& steps() const { return dts_; }
  double max_residual() const;

 private:
  ModelSpec model_;
  std::vector<double> residuals_;
  std::vector<double> dts_;
};

}  // namespace crossdiff
