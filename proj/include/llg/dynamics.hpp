#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "llg/grid.hpp"
#include "llg/target.hpp"

namespace llg {

/// Which semi-discrete flow the solver integrates.
///
///   LLG:      du/dt = nu ^ Lap_h(u) + alpha (Lap_h(u) + lambda nu)
///   HeatFlow: du/dt = Lap_h(u) + lambda nu
///
/// with lambda = -Lap_h(u) . nu the multiplier that keeps du/dt tangent.
enum class Flow : uint8_t { LLG = 0, HeatFlow = 1 };

enum class DtPolicy : uint8_t { Fixed = 0, Cfl = 1 };

enum class ProjectionMode : uint8_t { NearestPoint = 0, None = 1 };

struct SolverConfig {
  double alpha = 1.0;  ///< damping constant, >= 0
  std::shared_ptr<const Hypersurface> surface;
  Flow flow = Flow::LLG;
  DtPolicy dt_policy = DtPolicy::Cfl;
  double dt = 0.0;     ///< step size when dt_policy == Fixed
  double cfl = 0.125;  ///< in (0, 1/4]; dt = cfl h^2 / (1 + alpha)
  ProjectionMode projection = ProjectionMode::NearestPoint;
  double t_end = 1.0;
  int sample_every = 1;  ///< energy-trace cadence, in steps
  int threads = 1;

  void validate() const;
  double step_size(double h) const;
};

struct State {
  double t = 0.0;
  VectorField u;
};

struct EnergySample {
  double t = 0.0;
  double energy = 0.0;          ///< E_h[u(t)]
  double dissipation = 0.0;     ///< ||du/dt||^2 in L^2_h, via the analytic rhs
  double max_offmanifold = 0.0; ///< max node distance to the target surface
};

/// Timestamps are strictly increasing.
using EnergyTrace = std::vector<EnergySample>;

struct StepStats {
  /// Max node distance to the surface after the Runge-Kutta update and
  /// before the nearest-point retraction.
  double drift = 0.0;
};

using StepObserver = std::function<void(const State&, const StepStats&)>;

/// E_h[u] = (h^2/2) sum_j (1/2) sum_axes (|D+ u_j|^2 + |D- u_j|^2).
double discrete_energy(const VectorField& u);

/// Per-node density e_j = (1/4) sum_axes (|D+ u_j|^2 + |D- u_j|^2), so that
/// h^2 sum_j e_j = E_h[u].
ScalarField energy_density_field(const VectorField& u);

/// E_h restricted to nodes with |x_j - x_center| < R (min-image distance on
/// periodic grids). Requires R > h.
double local_energy(const VectorField& u, int cx, int cy, double R);

/// lambda_j = -Lap_h(u)_j . nu_j. All nodes must lie on the surface.
ScalarField lagrange_multiplier(const VectorField& u,
                                const Hypersurface& surface);

VectorField rhs_llg(const VectorField& u, const SolverConfig& config);
VectorField rhs_heatflow(const VectorField& u, const Hypersurface& surface);

/// Max node distance from the surface.
double max_offmanifold(const VectorField& u, const Hypersurface& surface);

/// The continuous-time energy balance of either flow is
///     dE_h/dt = -c ||du/dt||^2_{L^2_h}
/// with c = alpha/(1+alpha^2) for the precessional flow and c = 1 for the
/// damping-only flow. (Squaring du/dt = nu^P + alpha P with P the tangential
/// part of Lap_h(u) gives |du/dt|^2 = (1+alpha^2)|P|^2, while the energy
/// pairing sees only -alpha |P|^2.)
double dissipation_factor(const SolverConfig& config);

/// |dE_h/dt + dissipation_factor * ||rhs||^2| with dE_h/dt evaluated
/// analytically as -(Lap_h u, rhs). Zero up to roundoff for any on-manifold
/// field; a nonzero value indicates a broken tangency invariant.
double dissipation_identity_residual(const VectorField& u,
                                     const SolverConfig& config);

/// One classical 4-stage Runge-Kutta step of size step_size(h), followed by
/// node-wise nearest-point retraction when projection == NearestPoint.
State step(const State& state, const SolverConfig& config);
State step(const State& state, const SolverConfig& config, StepStats& stats);

/// Integrate from t = 0 to t_end, recording an EnergySample every
/// sample_every steps (plus the initial and final states). The observer, if
/// set, runs after every accepted step.
std::pair<State, EnergyTrace> evolve(const VectorField& initial,
                                     const SolverConfig& config,
                                     const StepObserver& observer = {});

}  // namespace llg
