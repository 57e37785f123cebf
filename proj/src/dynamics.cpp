#include "llg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "llg/parallel.hpp"
#include "llg/reduce.hpp"

namespace llg {

void SolverConfig::validate() const {
  if (!surface) throw std::invalid_argument("solver.surface is required");
  if (!(alpha >= 0.0))
    throw std::invalid_argument("solver.alpha must be >= 0");
  if (dt_policy == DtPolicy::Fixed) {
    if (!(dt > 0.0)) throw std::invalid_argument("solver.dt must be > 0");
  } else {
    if (!(cfl > 0.0) || !(cfl <= 0.25))
      throw std::invalid_argument("solver.cfl must be in (0, 0.25]");
  }
  if (!(t_end >= 0.0))
    throw std::invalid_argument("solver.t_end must be >= 0");
  if (sample_every < 1)
    throw std::invalid_argument("solver.sample_every must be >= 1");
  if (threads < 1) throw std::invalid_argument("solver.threads must be >= 1");
}

double SolverConfig::step_size(double h) const {
  if (dt_policy == DtPolicy::Fixed) return dt;
  return cfl * h * h / (1.0 + alpha);
}

namespace {

std::string node_name(int ix, int iy) {
  return "(" + std::to_string(ix) + ", " + std::to_string(iy) + ")";
}

void require_on_manifold(const VectorField& u, const Hypersurface& s,
                         const char* who) {
  for (int iy = 0; iy < u.spec.ny; ++iy)
    for (int ix = 0; ix < u.spec.nx; ++ix) {
      const Vec3& v = u.node(ix, iy);
      if (!v.finite() ||
          s.off_surface_distance(v) > 10.0 * Hypersurface::tol)
        throw std::invalid_argument(std::string(who) + ": node " +
                                    node_name(ix, iy) +
                                    " is off the target surface");
    }
}

/// Fused periodic right-hand side. kSphere bypasses the virtual normal with
/// u/|u|; kPrecession toggles the nu ^ Lap term (off for the damping-only
/// flow, which also drops the alpha prefactor).
template <bool kSphere, bool kPrecession>
void rhs_periodic(const VectorField& u, const Hypersurface& s, double alpha,
                  int threads, VectorField& out) {
  const GridSpec& g = u.spec;
  const int nx = g.nx;
  const int ny = g.ny;
  const double inv_h2 = 1.0 / (g.h * g.h);
  const Vec3* uv = u.values.data();
  Vec3* ov = out.values.data();
  parallel_for(ny, threads, [&](int y0, int y1) {
    for (int iy = y0; iy < y1; ++iy) {
      const int row = iy * nx;
      const int rowm = (iy == 0 ? ny - 1 : iy - 1) * nx;
      const int rowp = (iy == ny - 1 ? 0 : iy + 1) * nx;
      for (int ix = 0; ix < nx; ++ix) {
        const int xm = ix == 0 ? nx - 1 : ix - 1;
        const int xp = ix == nx - 1 ? 0 : ix + 1;
        const Vec3 c = uv[row + ix];
        const Vec3 lap = (uv[row + xm] + uv[row + xp] + uv[rowm + ix] +
                          uv[rowp + ix] - c * 4.0) *
                         inv_h2;
        Vec3 nu;
        if constexpr (kSphere) {
          nu = c / std::sqrt(c.norm2());
        } else {
          nu = s.normal(c);
        }
        const Vec3 p = lap - nu * lap.dot(nu);
        if constexpr (kPrecession) {
          ov[row + ix] = cross(nu, lap) + p * alpha;
        } else {
          ov[row + ix] = p;
        }
      }
    }
  });
}

/// Boundary-agnostic fallback; neighbor access through at() handles the
/// constant far field.
void rhs_generic(const VectorField& u, const Hypersurface& s, Flow flow,
                 double alpha, VectorField& out) {
  const VectorField lap = laplacian_h(u);
  for (int iy = 0; iy < u.spec.ny; ++iy)
    for (int ix = 0; ix < u.spec.nx; ++ix) {
      const Vec3 l = lap.node(ix, iy);
      const Vec3 nu = s.normal(u.node(ix, iy));
      const Vec3 p = l - nu * l.dot(nu);
      out.node(ix, iy) =
          flow == Flow::LLG ? Vec3{cross(nu, l) + p * alpha} : p;
    }
}

void rhs_unchecked(const VectorField& u, const Hypersurface& s, Flow flow,
                   double alpha, int threads, VectorField& out) {
  if (u.spec.boundary != Boundary::Periodic) {
    rhs_generic(u, s, flow, alpha, out);
    return;
  }
  const bool sphere = dynamic_cast<const UnitSphere*>(&s) != nullptr;
  if (flow == Flow::LLG) {
    if (sphere)
      rhs_periodic<true, true>(u, s, alpha, threads, out);
    else
      rhs_periodic<false, true>(u, s, alpha, threads, out);
  } else {
    if (sphere)
      rhs_periodic<true, false>(u, s, alpha, threads, out);
    else
      rhs_periodic<false, false>(u, s, alpha, threads, out);
  }
}

/// Energy density at one node: (h^2/4) sum_axes (|D+ u|^2 + |D- u|^2).
double energy_density(const VectorField& u, int ix, int iy) {
  const Vec3 c = u.node(ix, iy);
  const double inv_h = 1.0 / u.spec.h;
  const Vec3 dxp = (u.at(ix + 1, iy) - c) * inv_h;
  const Vec3 dxm = (c - u.at(ix - 1, iy)) * inv_h;
  const Vec3 dyp = (u.at(ix, iy + 1) - c) * inv_h;
  const Vec3 dym = (c - u.at(ix, iy - 1)) * inv_h;
  return 0.25 * u.spec.h * u.spec.h *
         (dxp.norm2() + dxm.norm2() + dyp.norm2() + dym.norm2());
}

/// ||v||^2 in L^2_h without the sqrt round trip.
double l2h_sq(const VectorField& v) { return inner_l2h(v, v); }

struct Workspace {
  VectorField k1, k2, k3, k4, stage;
  explicit Workspace(const GridSpec& g)
      : k1(g), k2(g), k3(g), k4(g), stage(g) {}
};

/// y = u + c k, fused.
void axpy(const VectorField& u, double c, const VectorField& k,
          int threads, VectorField& y) {
  const Vec3* uv = u.values.data();
  const Vec3* kv = k.values.data();
  Vec3* yv = y.values.data();
  const int n = static_cast<int>(u.values.size());
  parallel_for(n, threads, [&](int b, int e) {
    for (int i = b; i < e; ++i) yv[i] = uv[i] + kv[i] * c;
  });
}

/// Retract every node to the surface (or only measure, when mode == None).
/// Returns the max node distance to the surface before retraction.
double project_nodes(VectorField& u, const Hypersurface& s,
                     ProjectionMode mode) {
  const bool sphere = dynamic_cast<const UnitSphere*>(&s) != nullptr;
  double drift = 0.0;
  for (int iy = 0; iy < u.spec.ny; ++iy)
    for (int ix = 0; ix < u.spec.nx; ++ix) {
      Vec3& v = u.node(ix, iy);
      if (!v.finite())
        throw std::runtime_error("step: node " + node_name(ix, iy) +
                                 ": non-finite value");
      if (sphere) {
        const double n = v.norm();
        if (!(n > 0.0))
          throw std::runtime_error("step: node " + node_name(ix, iy) +
                                   ": retraction undefined at the origin");
        drift = std::max(drift, std::abs(n - 1.0));
        if (mode == ProjectionMode::NearestPoint) v = v / n;
      } else {
        Vec3 p;
        try {
          p = s.closest_point(v);
        } catch (const std::exception& e) {
          throw std::runtime_error("step: node " + node_name(ix, iy) + ": " +
                                   e.what());
        }
        drift = std::max(drift, (v - p).norm());
        if (mode == ProjectionMode::NearestPoint) v = p;
      }
    }
  return drift;
}

/// One RK4 step of size dt into out; returns stats. No validation.
StepStats step_into(const VectorField& u, const SolverConfig& cfg, double dt,
                    Workspace& ws, VectorField& out) {
  const Hypersurface& s = *cfg.surface;
  const int threads = cfg.threads;
  rhs_unchecked(u, s, cfg.flow, cfg.alpha, threads, ws.k1);
  axpy(u, 0.5 * dt, ws.k1, threads, ws.stage);
  rhs_unchecked(ws.stage, s, cfg.flow, cfg.alpha, threads, ws.k2);
  axpy(u, 0.5 * dt, ws.k2, threads, ws.stage);
  rhs_unchecked(ws.stage, s, cfg.flow, cfg.alpha, threads, ws.k3);
  axpy(u, dt, ws.k3, threads, ws.stage);
  rhs_unchecked(ws.stage, s, cfg.flow, cfg.alpha, threads, ws.k4);

  const Vec3* uv = u.values.data();
  const Vec3* k1 = ws.k1.values.data();
  const Vec3* k2 = ws.k2.values.data();
  const Vec3* k3 = ws.k3.values.data();
  const Vec3* k4 = ws.k4.values.data();
  Vec3* ov = out.values.data();
  const int n = static_cast<int>(u.values.size());
  const double w = dt / 6.0;
  parallel_for(n, threads, [&](int b, int e) {
    for (int i = b; i < e; ++i)
      ov[i] = uv[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
  });

  StepStats st;
  st.drift = project_nodes(out, s, cfg.projection);
  return st;
}

EnergySample sample_state(const State& st, const SolverConfig& cfg,
                          VectorField& scratch) {
  rhs_unchecked(st.u, *cfg.surface, cfg.flow, cfg.alpha, cfg.threads,
                scratch);
  return EnergySample{st.t, discrete_energy(st.u), l2h_sq(scratch),
                      max_offmanifold(st.u, *cfg.surface)};
}

}  // namespace

double discrete_energy(const VectorField& u) {
  const GridSpec& g = u.spec;
  std::vector<double> terms(g.size());
  if (g.boundary == Boundary::Periodic) {
    const int nx = g.nx;
    const int ny = g.ny;
    const double scale = 0.25;  // h^2/4 with the 1/h^2 of the differences
    const Vec3* uv = u.values.data();
    for (int iy = 0; iy < ny; ++iy) {
      const int row = iy * nx;
      const int rowm = (iy == 0 ? ny - 1 : iy - 1) * nx;
      const int rowp = (iy == ny - 1 ? 0 : iy + 1) * nx;
      for (int ix = 0; ix < nx; ++ix) {
        const int xm = ix == 0 ? nx - 1 : ix - 1;
        const int xp = ix == nx - 1 ? 0 : ix + 1;
        const Vec3 c = uv[row + ix];
        terms[row + ix] = scale * ((uv[row + xp] - c).norm2() +
                                   (c - uv[row + xm]).norm2() +
                                   (uv[rowp + ix] - c).norm2() +
                                   (c - uv[rowm + ix]).norm2());
      }
    }
  } else {
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        terms[g.index(ix, iy)] = energy_density(u, ix, iy);
  }
  return pairwise_sum(terms);
}

ScalarField energy_density_field(const VectorField& u) {
  ScalarField e(u.spec);
  const double inv_h2 = 1.0 / (u.spec.h * u.spec.h);
  for (int iy = 0; iy < u.spec.ny; ++iy)
    for (int ix = 0; ix < u.spec.nx; ++ix)
      e.node(ix, iy) = inv_h2 * energy_density(u, ix, iy);
  return e;
}

double local_energy(const VectorField& u, int cx, int cy, double R) {
  const GridSpec& g = u.spec;
  if (!(R > g.h)) throw std::invalid_argument("local_energy: need R > h");
  if (cx < 0 || cx >= g.nx || cy < 0 || cy >= g.ny)
    throw std::invalid_argument("local_energy: center outside grid");
  const double x0 = g.x(cx);
  const double y0 = g.y(cy);
  std::vector<double> terms;
  terms.reserve(g.size());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const double dx = g.min_image(g.x(ix) - x0, g.extent_x());
      const double dy = g.min_image(g.y(iy) - y0, g.extent_y());
      if (dx * dx + dy * dy < R * R)
        terms.push_back(energy_density(u, ix, iy));
    }
  return pairwise_sum(terms);
}

ScalarField lagrange_multiplier(const VectorField& u,
                                const Hypersurface& surface) {
  require_on_manifold(u, surface, "lagrange_multiplier");
  const VectorField lap = laplacian_h(u);
  ScalarField out(u.spec);
  for (int iy = 0; iy < u.spec.ny; ++iy)
    for (int ix = 0; ix < u.spec.nx; ++ix)
      out.node(ix, iy) =
          -lap.node(ix, iy).dot(surface.normal(u.node(ix, iy)));
  return out;
}

VectorField rhs_llg(const VectorField& u, const SolverConfig& config) {
  config.validate();
  require_on_manifold(u, *config.surface, "rhs_llg");
  VectorField out(u.spec);
  rhs_unchecked(u, *config.surface, Flow::LLG, config.alpha, config.threads,
                out);
  return out;
}

VectorField rhs_heatflow(const VectorField& u, const Hypersurface& surface) {
  require_on_manifold(u, surface, "rhs_heatflow");
  VectorField out(u.spec);
  rhs_unchecked(u, surface, Flow::HeatFlow, 0.0, 1, out);
  return out;
}

double max_offmanifold(const VectorField& u, const Hypersurface& surface) {
  double m = 0.0;
  for (const Vec3& v : u.values)
    m = std::max(m, surface.off_surface_distance(v));
  return m;
}

double dissipation_factor(const SolverConfig& config) {
  if (config.flow == Flow::HeatFlow) return 1.0;
  return config.alpha / (1.0 + config.alpha * config.alpha);
}

double dissipation_identity_residual(const VectorField& u,
                                     const SolverConfig& config) {
  config.validate();
  VectorField rhs(u.spec);
  rhs_unchecked(u, *config.surface, config.flow, config.alpha, config.threads,
                rhs);
  const double dEdt = -inner_l2h(laplacian_h(u), rhs);
  return std::abs(dEdt + dissipation_factor(config) * l2h_sq(rhs));
}

State step(const State& state, const SolverConfig& config) {
  StepStats ignored;
  return step(state, config, ignored);
}

State step(const State& state, const SolverConfig& config, StepStats& stats) {
  config.validate();
  Workspace ws(state.u.spec);
  State next{state.t, VectorField(state.u.spec)};
  next.u.far_value = state.u.far_value;
  const double dt = config.step_size(state.u.spec.h);
  stats = step_into(state.u, config, dt, ws, next.u);
  next.t = state.t + dt;
  return next;
}

std::pair<State, EnergyTrace> evolve(const VectorField& initial,
                                     const SolverConfig& config,
                                     const StepObserver& observer) {
  config.validate();
  require_on_manifold(initial, *config.surface, "evolve");

  const double dt = config.step_size(initial.spec.h);
  const double t_end = config.t_end;
  long nsteps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  if (nsteps < 0) nsteps = 0;

  State cur{0.0, initial};
  Workspace ws(initial.spec);
  VectorField next(initial.spec);
  next.far_value = initial.far_value;
  VectorField scratch(initial.spec);

  EnergyTrace trace;
  trace.push_back(sample_state(cur, config, scratch));

  for (long i = 1; i <= nsteps; ++i) {
    const double t_target = i == nsteps ? t_end : i * dt;
    const double dt_i = t_target - cur.t;
    if (!(dt_i > 0.0)) break;
    const StepStats st = step_into(cur.u, config, dt_i, ws, next);
    std::swap(cur.u, next);
    cur.t = t_target;
    if (observer) observer(cur, st);
    if (i % config.sample_every == 0 || i == nsteps)
      trace.push_back(sample_state(cur, config, scratch));
  }
  return {std::move(cur), std::move(trace)};
}

}  // namespace llg
