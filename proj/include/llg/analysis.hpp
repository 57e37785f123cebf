#pragma once

#include <string>
#include <vector>

#include "llg/dynamics.hpp"
#include "llg/grid.hpp"
#include "llg/interpolant.hpp"

namespace llg {

/// States stored at a uniform cadence during a run.
struct Trajectory {
  std::vector<State> states;

  /// Uniform spacing of the stored states; throws when the trajectory is
  /// shorter than two states or unevenly sampled.
  double cadence() const;
};

/// One sampled row of the local energy inequality
///   E[u(t); B_R] + c int_{t0}^t ||du/dt zeta||^2  <=
///   E[u(t0); B_2R] + C (t - t0)/R^2 E[f],
/// where c is the flow's dissipation factor (alpha/(1+alpha^2) for the
/// precessional flow, 1 for the damping-only flow); with a cutoff frozen at
/// 1 the right-hand side collapses to E[f] and the inequality saturates.
struct LocalEnergyRow {
  double t = 0.0;
  double local_energy = 0.0;     ///< E[u(t); B_R]
  double dissipation_acc = 0.0;  ///< trapezoid of c ||du/dt zeta||^2 from t0
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< rhs - lhs
};

struct LocalEnergyReport {
  int cx = 0;
  int cy = 0;
  double R = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  double C_used = 0.0;    ///< constant in the rhs (default 2 k1^2)
  double C_fitted = 0.0;  ///< minimal constant with nonnegative slack
  double initial_2R = 0.0;
  double total_energy = 0.0;  ///< E[f], energy of the first stored state
  double min_slack = 0.0;
  std::vector<LocalEnergyRow> rows;

  bool holds() const {
    return min_slack >= -1e-12 * (1.0 + total_energy);
  }
};

/// Evaluates the inequality along the stored trajectory. t0 and t1 must be
/// stored sample times; the time-derivative term uses the analytic rhs of
/// the configured flow. C = 0 selects the default 2 k1^2 from the cutoff.
LocalEnergyReport local_energy_inequality_check(const Trajectory& traj,
                                                const SolverConfig& config,
                                                int cx, int cy, double R,
                                                double t0, double t1,
                                                double C = 0.0);

/// ||D^2 u(t)|| over a ball, plus the running sup of s^{1/2} ||D^2 u(s)||.
struct DerivativeSample {
  double t = 0.0;
  double d2_norm = 0.0;
  double y = 0.0;
};

std::vector<DerivativeSample> second_derivative_trace(const Trajectory& traj,
                                                      int cx, int cy,
                                                      double R);

struct ConcentrationCylinder {
  int cx = 0;
  int cy = 0;
  double t = 0.0;       ///< top of the cylinder (sample time)
  double radius = 0.0;  ///< snapped so t - delta R^2/2 sits on the partition
  double local_energy = 0.0;
  bool selected = false;
};

struct ConcentrationReport {
  double eps0 = 0.0;
  double delta = 0.0;
  double R0 = 0.0;
  double total_energy = 0.0;
  double slice_length = 0.0;  ///< delta R0^2 / 2
  std::vector<ConcentrationCylinder> cylinders;  ///< all flagged
  double sum_r2 = 0.0;        ///< over the selected cylinders
  double ledger_bound = 0.0;  ///< E[f] / (2 delta eps0)
  int max_per_slice = 0;      ///< selected count at the busiest sample time
  double per_slice_bound = 0.0;  ///< E[f] / (2 eps0)
  bool disjoint_ok = true;
  std::string note;
};

/// Scans every stored time and node center for balls whose local energy
/// exceeds eps0 at the snapped radius, then greedily keeps a disjoint
/// subfamily per sample time (largest radius first, then lexicographic
/// center). delta = 0 selects eps0 / (2 E[f]). Requires the trajectory
/// cadence to be at most delta R0^2 / 4.
ConcentrationReport detect_concentration(const Trajectory& traj, double eps0,
                                         double R0, double delta = 0.0);

}  // namespace llg
