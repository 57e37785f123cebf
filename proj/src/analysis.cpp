#include "llg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "llg/reduce.hpp"

namespace llg {

namespace {

/// Index of the stored state whose time matches t, or -1.
int find_sample(const std::vector<State>& states, double t, double dt) {
  const double tol = 1e-9 + 1e-6 * dt;
  for (std::size_t k = 0; k < states.size(); ++k)
    if (std::abs(states[k].t - t) <= tol) return static_cast<int>(k);
  return -1;
}

/// Cutoff equal to 1 on B_R, supported in B_2R. When the ball covers the
/// whole grid the cutoff degenerates to the constant 1 with zero derivative
/// bounds, which turns the local inequality into the global energy bound.
CutoffFunction cutoff_or_one(const GridSpec& g, int cx, int cy, double R) {
  const double ex = g.extent_x();
  const double ey = g.extent_y();
  const double cover = 0.5 * std::sqrt(ex * ex + ey * ey);
  if (R > cover) {
    CutoffFunction one;
    one.cx = cx;
    one.cy = cy;
    one.R = R;
    one.zeta = ScalarField(g);
    std::fill(one.zeta.values.begin(), one.zeta.values.end(), 1.0);
    one.k1 = 0.0;
    one.k2 = 0.0;
    return one;
  }
  return build_cutoff(g, cx, cy, R);
}

/// h^2 sum_j |rhs_j|^2 zeta_j^2.
double weighted_rate_sq(const VectorField& rhs, const ScalarField& zeta) {
  std::vector<double> terms(rhs.values.size());
  for (std::size_t i = 0; i < terms.size(); ++i)
    terms[i] = rhs.values[i].norm2() * zeta.values[i] * zeta.values[i];
  return rhs.spec.h * rhs.spec.h * pairwise_sum(terms);
}

VectorField flow_rhs(const VectorField& u, const SolverConfig& config) {
  if (config.flow == Flow::HeatFlow) return rhs_heatflow(u, *config.surface);
  return rhs_llg(u, config);
}

}  // namespace

double Trajectory::cadence() const {
  if (states.size() < 2)
    throw std::invalid_argument("trajectory: need at least two stored states");
  const double dt = states[1].t - states[0].t;
  if (!(dt > 0.0))
    throw std::invalid_argument("trajectory: stored times must increase");
  for (std::size_t k = 1; k + 1 < states.size(); ++k) {
    const double step = states[k + 1].t - states[k].t;
    if (std::abs(step - dt) > 1e-9 * (1.0 + std::abs(dt)))
      throw std::invalid_argument(
          "trajectory: stored times must form a uniform mesh");
  }
  return dt;
}

LocalEnergyReport local_energy_inequality_check(const Trajectory& traj,
                                                const SolverConfig& config,
                                                int cx, int cy, double R,
                                                double t0, double t1,
                                                double C) {
  if (!config.surface)
    throw std::invalid_argument(
        "local_energy_inequality_check: solver.surface is required");
  if (!(t1 > t0))
    throw std::invalid_argument(
        "local_energy_inequality_check: need t1 > t0");
  const double dt = traj.cadence();
  const std::vector<State>& states = traj.states;
  const int k0 = find_sample(states, t0, dt);
  const int k1 = find_sample(states, t1, dt);
  if (k0 < 0 || k1 < 0 || k1 <= k0)
    throw std::invalid_argument(
        "local_energy_inequality_check: insufficient sampling, t0 and t1 "
        "must be stored sample times");

  const GridSpec& g = states.front().u.spec;
  if (cx < 0 || cx >= g.nx || cy < 0 || cy >= g.ny)
    throw std::invalid_argument(
        "local_energy_inequality_check: center outside grid");
  const CutoffFunction cut = cutoff_or_one(g, cx, cy, R);

  LocalEnergyReport report;
  report.cx = cx;
  report.cy = cy;
  report.R = R;
  report.t0 = t0;
  report.t1 = t1;
  report.C_used = C > 0.0 ? C : 2.0 * cut.k1 * cut.k1;
  report.total_energy = discrete_energy(states.front().u);

  const double cover =
      0.5 * std::sqrt(g.extent_x() * g.extent_x() +
                      g.extent_y() * g.extent_y());
  report.initial_2R = 2.0 * R > cover ? discrete_energy(states[k0].u)
                                      : local_energy(states[k0].u, cx, cy,
                                                     2.0 * R);

  double acc = 0.0;
  double prev_rate = 0.0;
  double c_fit = 0.0;
  report.min_slack = kInfinity;
  // The energy pairing sees only the damping part of du/dt, so the
  // dissipation term carries the flow's factor (alpha/(1+alpha^2), or 1 for
  // the damping-only flow); without it the precessional flow overcounts by
  // (1+alpha^2)/alpha and the whole-domain inequality fails.
  const double factor = dissipation_factor(config);
  for (int k = k0; k <= k1; ++k) {
    const double rate = factor * weighted_rate_sq(flow_rhs(states[k].u, config),
                                                  cut.zeta);
    if (k > k0) acc += 0.5 * (prev_rate + rate) * (states[k].t - states[k - 1].t);
    prev_rate = rate;

    LocalEnergyRow row;
    row.t = states[k].t;
    row.local_energy = local_energy(states[k].u, cx, cy, R);
    row.dissipation_acc = acc;
    row.lhs = row.local_energy + acc;
    row.rhs = report.initial_2R + report.C_used * (row.t - t0) / (R * R) *
                                      report.total_energy;
    row.slack = row.rhs - row.lhs;
    report.min_slack = std::min(report.min_slack, row.slack);
    if (k > k0 && report.total_energy > 0.0)
      c_fit = std::max(c_fit, (row.lhs - report.initial_2R) * R * R /
                                  ((row.t - t0) * report.total_energy));
    report.rows.push_back(row);
  }
  report.C_fitted = c_fit;
  return report;
}

std::vector<DerivativeSample> second_derivative_trace(const Trajectory& traj,
                                                      int cx, int cy,
                                                      double R) {
  traj.cadence();
  const GridSpec& g = traj.states.front().u.spec;
  if (cx < 0 || cx >= g.nx || cy < 0 || cy >= g.ny)
    throw std::invalid_argument(
        "second_derivative_trace: center outside grid");
  if (!(R > g.h))
    throw std::invalid_argument("second_derivative_trace: need R > h");

  // Node mask for the ball, reused across states and derivative directions.
  std::vector<int> inside;
  const double x0 = g.x(cx);
  const double y0 = g.y(cy);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const double dx = g.min_image(g.x(ix) - x0, g.extent_x());
      const double dy = g.min_image(g.y(iy) - y0, g.extent_y());
      if (dx * dx + dy * dy < R * R) inside.push_back(g.index(ix, iy));
    }

  const std::vector<MultiIndex> alphas = multi_indices(2, true);
  std::vector<DerivativeSample> out;
  out.reserve(traj.states.size());
  double running = 0.0;
  std::vector<double> terms(inside.size());
  for (const State& st : traj.states) {
    double d2 = 0.0;
    for (const MultiIndex& a : alphas) {
      const VectorField da = multi_diff(st.u, a);
      for (std::size_t i = 0; i < inside.size(); ++i)
        terms[i] = da.values[inside[i]].norm2();
      d2 += std::sqrt(g.h * g.h * pairwise_sum(terms));
    }
    running = std::max(running, std::sqrt(std::max(st.t, 0.0)) * d2);
    out.push_back(DerivativeSample{st.t, d2, running});
  }
  return out;
}

ConcentrationReport detect_concentration(const Trajectory& traj, double eps0,
                                         double R0, double delta) {
  const double dt = traj.cadence();
  const GridSpec& g = traj.states.front().u.spec;
  if (!(eps0 > 0.0))
    throw std::invalid_argument("detect_concentration: eps0 must be > 0");
  if (!(R0 > g.h))
    throw std::invalid_argument(
        "detect_concentration: need R0 > grid spacing");
  if (2.0 * R0 > std::min(g.extent_x(), g.extent_y()))
    throw std::invalid_argument(
        "detect_concentration: R0 must fit in half the domain");

  ConcentrationReport report;
  report.eps0 = eps0;
  report.R0 = R0;
  report.total_energy = discrete_energy(traj.states.front().u);
  report.note =
      "liminf over vanishing grid spacing approximated at this spacing; "
      "rerun across an h-ladder and keep the minimum for the limiting "
      "statement";
  if (report.total_energy <= 0.0) {
    report.delta = delta > 0.0 ? delta : 1.0;
    report.slice_length = report.delta * R0 * R0 / 2.0;
    return report;
  }
  report.delta = delta > 0.0 ? delta : eps0 / (2.0 * report.total_energy);
  report.slice_length = report.delta * R0 * R0 / 2.0;
  report.ledger_bound =
      report.total_energy / (2.0 * report.delta * eps0);
  report.per_slice_bound = report.total_energy / (2.0 * eps0);
  if (dt > report.slice_length / 2.0 * (1.0 + 1e-9))
    throw std::invalid_argument(
        "detect_concentration: trajectory cadence too coarse, need stored "
        "states at most delta R0^2/4 apart");

  const double ex = g.extent_x();
  const double ey = g.extent_y();
  for (const State& st : traj.states) {
    // Snap the radius so the cylinder bottom t - delta R^2/2 sits on the
    // slice boundary below t (a sample exactly on a boundary belongs to the
    // earlier slice and gets the full radius R0).
    const long beta =
        static_cast<long>(std::floor(st.t / report.slice_length - 1e-9));
    if (beta < 0) continue;
    const double gap = st.t - static_cast<double>(beta) * report.slice_length;
    const double radius = std::sqrt(2.0 * gap / report.delta);
    if (radius <= g.h * (1.0 + 1e-12)) continue;

    const ScalarField density = energy_density_field(st.u);

    // Offsets once per sample time: every flagged ball at this time shares
    // the snapped radius.
    const int reach = static_cast<int>(std::floor(radius / g.h));
    std::vector<std::pair<int, int>> offsets;
    for (int oy = -reach; oy <= reach; ++oy)
      for (int ox = -reach; ox <= reach; ++ox)
        if ((ox * ox + oy * oy) * g.h * g.h < radius * radius)
          offsets.emplace_back(ox, oy);

    std::vector<ConcentrationCylinder> flagged;
    std::vector<double> terms(offsets.size());
    for (int cy = 0; cy < g.ny; ++cy)
      for (int cx = 0; cx < g.nx; ++cx) {
        for (std::size_t i = 0; i < offsets.size(); ++i) {
          int ix = cx + offsets[i].first;
          int iy = cy + offsets[i].second;
          if (g.boundary == Boundary::Periodic) {
            ix = (ix % g.nx + g.nx) % g.nx;
            iy = (iy % g.ny + g.ny) % g.ny;
          } else if (ix < 0 || ix >= g.nx || iy < 0 || iy >= g.ny) {
            terms[i] = 0.0;
            continue;
          }
          terms[i] = density.node(ix, iy);
        }
        const double local = g.h * g.h * pairwise_sum(terms);
        if (local > eps0)
          flagged.push_back(
              ConcentrationCylinder{cx, cy, st.t, radius, local, false});
      }

    // Greedy disjoint subfamily at this sample time (equal radii, so the
    // scan order is lexicographic in the center).
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < flagged.size(); ++i) {
      bool ok = true;
      for (std::size_t k : kept) {
        const double dx = g.min_image(g.x(flagged[i].cx) - g.x(flagged[k].cx),
                                      ex);
        const double dy = g.min_image(g.y(flagged[i].cy) - g.y(flagged[k].cy),
                                      ey);
        if (std::sqrt(dx * dx + dy * dy) <
            flagged[i].radius + flagged[k].radius - 1e-12) {
          ok = false;
          break;
        }
      }
      if (ok) {
        flagged[i].selected = true;
        kept.push_back(i);
      }
    }
    report.max_per_slice =
        std::max(report.max_per_slice, static_cast<int>(kept.size()));
    for (std::size_t k : kept)
      report.sum_r2 += flagged[k].radius * flagged[k].radius;
    report.cylinders.insert(report.cylinders.end(), flagged.begin(),
                            flagged.end());
  }

  // Redundant pairwise verification of the selection at each sample time.
  for (std::size_t i = 0; i < report.cylinders.size(); ++i) {
    if (!report.cylinders[i].selected) continue;
    for (std::size_t j = i + 1; j < report.cylinders.size(); ++j) {
      if (!report.cylinders[j].selected) continue;
      if (report.cylinders[i].t != report.cylinders[j].t) continue;
      const double dx = g.min_image(
          g.x(report.cylinders[i].cx) - g.x(report.cylinders[j].cx), ex);
      const double dy = g.min_image(
          g.y(report.cylinders[i].cy) - g.y(report.cylinders[j].cy), ey);
      if (std::sqrt(dx * dx + dy * dy) <
          report.cylinders[i].radius + report.cylinders[j].radius - 1e-12)
        report.disjoint_ok = false;
    }
  }
  return report;
}

}  // namespace llg
