#include "llg/frames.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace llg {

namespace {

std::string node_name(int ix, int iy) {
  return "(" + std::to_string(ix) + ", " + std::to_string(iy) + ")";
}

/// Transport e across one edge: project onto the tangent plane at the new
/// point and renormalize. Degenerate when the tangent planes are nearly
/// orthogonal (neighbor values far apart on the surface).
Vec3 transport_edge(const Hypersurface& s, const Vec3& u_next, const Vec3& e,
                    int ix, int iy) {
  const Vec3 p = s.tangent_project(u_next, e);
  const double n = p.norm();
  if (!(n >= 0.5))
    throw std::invalid_argument("transport_frame: degenerate transport at node " +
                                node_name(ix, iy));
  return p / n;
}

void require_on_manifold(const VectorField& u, const Hypersurface& s,
                         const char* who) {
  for (int iy = 0; iy < u.spec.ny; ++iy)
    for (int ix = 0; ix < u.spec.nx; ++ix) {
      const Vec3& v = u.node(ix, iy);
      if (!v.finite() || s.off_surface_distance(v) > 10.0 * Hypersurface::tol)
        throw std::invalid_argument(std::string(who) + ": node " +
                                    node_name(ix, iy) +
                                    " is off the target surface");
    }
}

}  // namespace

FrameField transport_frame(const VectorField& u, const Hypersurface& surface,
                           const Vec3& seed) {
  require_on_manifold(u, surface, "transport_frame");
  FrameField f;
  f.spec = u.spec;
  f.e1.resize(u.spec.size());
  f.e2.resize(u.spec.size());

  const Vec3 s0 = surface.tangent_project(u.node(0, 0), seed);
  if (!(s0.norm() > 1e-6))
    throw std::invalid_argument(
        "transport_frame: seed is not tangent at node (0, 0)");
  f.e1[0] = s0 / s0.norm();

  for (int ix = 1; ix < u.spec.nx; ++ix)
    f.e1[u.spec.index(ix, 0)] = transport_edge(
        surface, u.node(ix, 0), f.e1[u.spec.index(ix - 1, 0)], ix, 0);
  for (int ix = 0; ix < u.spec.nx; ++ix)
    for (int iy = 1; iy < u.spec.ny; ++iy)
      f.e1[u.spec.index(ix, iy)] = transport_edge(
          surface, u.node(ix, iy), f.e1[u.spec.index(ix, iy - 1)], ix, iy);

  for (int iy = 0; iy < u.spec.ny; ++iy)
    for (int ix = 0; ix < u.spec.nx; ++ix) {
      const std::size_t i = u.spec.index(ix, iy);
      f.e2[i] = cross(surface.normal(u.node(ix, iy)), f.e1[i]);
    }
  return f;
}

FrameField pullback_global_frame(const VectorField& u,
                                 const Hypersurface& surface) {
  if (!surface.has_global_frame())
    throw std::invalid_argument(
        "pullback_global_frame: target has no global frame");
  require_on_manifold(u, surface, "pullback_global_frame");
  FrameField f;
  f.spec = u.spec;
  f.e1.resize(u.spec.size());
  f.e2.resize(u.spec.size());
  for (int iy = 0; iy < u.spec.ny; ++iy)
    for (int ix = 0; ix < u.spec.nx; ++ix) {
      const auto pair = surface.global_frame(u.node(ix, iy));
      const std::size_t i = u.spec.index(ix, iy);
      f.e1[i] = pair->first;
      f.e2[i] = pair->second;
    }
  return f;
}

double loop_holonomy(const Hypersurface& surface,
                     const std::vector<Vec3>& loop, const Vec3& seed) {
  if (loop.size() < 3)
    throw std::invalid_argument("loop_holonomy: need at least 3 loop points");
  for (const Vec3& p : loop) surface.require_on_surface(p, "loop_holonomy");
  const Vec3 s0 = surface.tangent_project(loop.front(), seed);
  if (!(s0.norm() > 1e-6))
    throw std::invalid_argument("loop_holonomy: seed is not tangent");
  const Vec3 e0 = s0 / s0.norm();
  Vec3 e = e0;
  for (std::size_t i = 1; i < loop.size(); ++i)
    e = transport_edge(surface, loop[i], e, static_cast<int>(i), 0);
  e = transport_edge(surface, loop.front(), e, 0, 0);
  const Vec3 nu = surface.normal(loop.front());
  return std::atan2(cross(e0, e).dot(nu), e0.dot(e));
}

ComplexDerivativeField decompose(const VectorField& u,
                                 const FrameField& frames,
                                 const Hypersurface& surface) {
  require_same_spec(u.spec, frames.spec, "decompose");
  ComplexDerivativeField d;
  d.spec = u.spec;
  const Axis axes[2] = {Axis::X1, Axis::X2};
  for (int k = 0; k < 2; ++k) {
    const VectorField dp = diff(u, axes[k], DiffKind::Forward);
    const VectorField dm = diff(u, axes[k], DiffKind::Backward);
    d.q_plus[k] = ComplexField(u.spec);
    d.q_minus[k] = ComplexField(u.spec);
    d.a_plus[k] = ScalarField(u.spec);
    d.a_minus[k] = ScalarField(u.spec);
    for (int iy = 0; iy < u.spec.ny; ++iy)
      for (int ix = 0; ix < u.spec.nx; ++ix) {
        const std::size_t i = u.spec.index(ix, iy);
        const Vec3 nu = surface.normal(u.values[i]);
        const Vec3& e1 = frames.e1[i];
        const Vec3& e2 = frames.e2[i];
        d.q_plus[k].values[i] = {dp.values[i].dot(e1), dp.values[i].dot(e2)};
        d.q_minus[k].values[i] = {dm.values[i].dot(e1), dm.values[i].dot(e2)};
        d.a_plus[k].values[i] = dp.values[i].dot(nu);
        d.a_minus[k].values[i] = dm.values[i].dot(nu);
      }
  }
  return d;
}

namespace {

FrameField frame_for(const VectorField& u, const Hypersurface& surface) {
  if (surface.has_global_frame()) return pullback_global_frame(u, surface);
  // No section exists: fall back to a transported frame with a fixed seed.
  const Vec3 trials[2] = {Vec3{1.0, 0.0, 0.0}, Vec3{0.0, 1.0, 0.0}};
  for (const Vec3& t : trials)
    if (surface.tangent_project(u.node(0, 0), t).norm() > 1e-3)
      return transport_frame(u, surface, t);
  throw std::runtime_error("linearization_residual: no usable frame seed");
}

double cabs(const std::complex<double>& c) { return std::abs(c); }

}  // namespace

LinearizationResidual linearization_residual(const std::vector<State>& states,
                                             const Hypersurface& surface) {
  if (states.size() < 3)
    throw std::invalid_argument(
        "linearization_residual: need at least 3 states");
  const std::size_t m = states.size() / 2;
  const State& prev = states[m - 1];
  const State& mid = states[m];
  const State& next = states[m + 1];
  require_same_spec(prev.u.spec, mid.u.spec, "linearization_residual");
  require_same_spec(next.u.spec, mid.u.spec, "linearization_residual");

  const double dt1 = mid.t - prev.t;
  const double dt2 = next.t - mid.t;
  if (!(dt1 > 0.0) || std::abs(dt2 - dt1) > 1e-9 * dt1)
    throw std::invalid_argument(
        "linearization_residual: states must sit on a uniform time mesh");
  const double h = mid.u.spec.h;
  if (dt1 > h * h / 16.0 * (1.0 + 1e-9))
    throw std::invalid_argument(
        "linearization_residual: time mesh too coarse (dt = " +
        std::to_string(dt1) + ", need dt <= h^2/16 = " +
        std::to_string(h * h / 16.0) +
        " so the centered time difference resolves the linear term)");

  const bool global = surface.has_global_frame();
  const ComplexDerivativeField qp = decompose(prev.u, frame_for(prev.u, surface), surface);
  const ComplexDerivativeField qm = decompose(mid.u, frame_for(mid.u, surface), surface);
  const ComplexDerivativeField qn = decompose(next.u, frame_for(next.u, surface), surface);

  LinearizationResidual out;
  out.spec = mid.u.spec;
  out.dt = dt1;
  out.residual_1 = ComplexField(mid.u.spec);
  out.residual_2 = ComplexField(mid.u.spec);
  out.scale = ScalarField(mid.u.spec);
  out.ratio = ScalarField(mid.u.spec);

  const std::complex<double> one_plus_i{1.0, 1.0};
  const ComplexField lap1 = laplacian_h(qm.q_plus[0]);
  const ComplexField lap2 = laplacian_h(qm.q_plus[1]);
  const double inv_2dt = 1.0 / (2.0 * dt1);
  for (std::size_t i = 0; i < mid.u.values.size(); ++i) {
    out.residual_1.values[i] =
        (qn.q_plus[0].values[i] - qp.q_plus[0].values[i]) * inv_2dt -
        one_plus_i * lap1.values[i];
    out.residual_2.values[i] =
        (qn.q_plus[1].values[i] - qp.q_plus[1].values[i]) * inv_2dt -
        one_plus_i * lap2.values[i];
  }

  // Reference magnitudes of the middle state: |q| is the max of the four
  // components, |D1 q| the max first difference across components.
  const GridSpec& g = mid.u.spec;
  ScalarField qabs(g);
  ScalarField dq(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double a = 0.0;
    for (int k = 0; k < 2; ++k)
      a = std::max({a, cabs(qm.q_plus[k].values[i]),
                    cabs(qm.q_minus[k].values[i])});
    qabs.values[i] = a;
  }
  for (int k = 0; k < 2; ++k)
    for (const MultiIndex& a : multi_indices(1, true)) {
      const ComplexField dd = multi_diff(qm.q_plus[k], a);
      for (std::size_t i = 0; i < g.size(); ++i)
        dq.values[i] = std::max(dq.values[i], cabs(dd.values[i]));
    }

  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      double cubic = 0.0;
      double grad = 0.0;
      const int offs[5][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& o : offs) {
        const double qa = qabs.at(ix + o[0], iy + o[1]);
        const double qd = dq.at(ix + o[0], iy + o[1]);
        cubic = std::max(cubic, qa * qa * qa);
        grad = std::max(grad, qa * qd);
      }
      out.scale.node(ix, iy) = cubic + grad;
    }

  double max_scale = 0.0;
  for (double v : out.scale.values) max_scale = std::max(max_scale, v);
  const int margin = global ? 0 : 4;  // keep clear of the transport seam
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t i = g.index(ix, iy);
      const bool interior = ix >= margin && ix < g.nx - margin &&
                            iy >= margin && iy < g.ny - margin;
      const double sc = out.scale.values[i];
      double r = 0.0;
      if (interior && sc > 1e-14 * std::max(max_scale, 1e-300)) {
        r = std::max(cabs(out.residual_1.values[i]),
                     cabs(out.residual_2.values[i])) /
            sc;
      }
      out.ratio.values[i] = r;
      out.ratio_max = std::max(out.ratio_max, r);
      out.q_max = std::max(out.q_max, qabs.values[i]);
    }
  const double n1 = lp_norm(out.residual_1, 2.0);
  const double n2 = lp_norm(out.residual_2, 2.0);
  out.residual_l2 = std::sqrt(n1 * n1 + n2 * n2);
  return out;
}

}  // namespace llg
