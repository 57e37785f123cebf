#include "llg/experiment.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "llg/field_io.hpp"
#include "llg/frames.hpp"
#include "llg/interpolant.hpp"
#include "llg/kernels.hpp"
#include "llg/rng.hpp"

namespace llg {

namespace {

namespace fs = std::filesystem;

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

/// CSV accumulator; doubles printed with %.17g so reruns are byte-stable.
class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> cols) {
    bool first = true;
    for (const char* c : cols) {
      if (!first) text_ += ',';
      text_ += c;
      first = false;
    }
    text_ += '\n';
  }

  template <typename... A>
  void row(const A&... a) {
    bool first = true;
    (cell(a, first), ...);
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

 private:
  void sep(bool& first) {
    if (!first) text_ += ',';
    first = false;
  }
  void cell(double v, bool& first) {
    sep(first);
    text_ += fmt_g(v);
  }
  void cell(int v, bool& first) {
    sep(first);
    text_ += std::to_string(v);
  }
  void cell(long v, bool& first) {
    sep(first);
    text_ += std::to_string(v);
  }
  void cell(uint64_t v, bool& first) {
    sep(first);
    text_ += std::to_string(v);
  }
  void cell(bool v, bool& first) {
    sep(first);
    text_ += v ? "1" : "0";
  }
  void cell(const char* v, bool& first) {
    sep(first);
    text_ += v;
  }
  void cell(const std::string& v, bool& first) {
    sep(first);
    text_ += v;
  }

  std::string text_;
};

struct FileEntry {
  std::string name;
  uint64_t bytes = 0;
  std::string hash;
};

/// Collects artifacts under one output directory, remembering size and
/// content hash of everything written for the manifest.
class Artifacts {
 public:
  explicit Artifacts(std::string dir) : dir_(std::move(dir)) {}

  void text_file(const std::string& name, const std::string& body) {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw std::runtime_error("run: cannot write '" + name + "'");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    out.close();
    entries_.push_back(
        FileEntry{name, body.size(), hex64(fnv1a64(body.data(), body.size()))});
  }

  void field_file(const std::string& name, const VectorField& u) {
    write_llgf(path(name), u);
    record(name);
  }

  void pgm_frame(const std::string& name, const ScalarField& density) {
    const double scale = write_pgm(path(name), density);
    record(name);
    pgm_scales_[name] = scale;
  }

  std::string path(const std::string& name) const { return dir_ + "/" + name; }
  const std::vector<FileEntry>& entries() const { return entries_; }
  const std::map<std::string, double>& pgm_scales() const {
    return pgm_scales_;
  }

 private:
  void record(const std::string& name) {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    const std::string bytes = body.str();
    entries_.push_back(FileEntry{
        name, bytes.size(), hex64(fnv1a64(bytes.data(), bytes.size()))});
  }

  std::string dir_;
  std::vector<FileEntry> entries_;
  std::map<std::string, double> pgm_scales_;
};

/// O_CREAT|O_EXCL lock file; concurrent runs into one directory refuse.
class LockFile {
 public:
  explicit LockFile(std::string path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw std::runtime_error(
          "run: output directory is locked by another run (" + path_ + ")");
  }
  ~LockFile() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

struct RunOutput {
  State final_state;
  EnergyTrace trace;
  Trajectory traj;
};

/// evolve() while keeping every sample_every-th state (plus the initial one)
/// for the analysis passes.
RunOutput run_flow(const VectorField& f, const SolverConfig& sc) {
  RunOutput out;
  out.traj.states.push_back(State{0.0, f});
  long count = 0;
  auto observer = [&](const State& st, const StepStats&) {
    ++count;
    if (count % sc.sample_every == 0) out.traj.states.push_back(st);
  };
  auto [fin, trace] = evolve(f, sc, observer);
  out.final_state = std::move(fin);
  out.trace = std::move(trace);
  return out;
}

std::string energy_csv(const EnergyTrace& trace) {
  Csv csv{"t", "energy", "dissipation", "max_offmanifold"};
  for (const EnergySample& s : trace)
    csv.row(s.t, s.energy, s.dissipation, s.max_offmanifold);
  return csv.text();
}

void write_frames(const ExperimentConfig& cfg, const Trajectory& traj,
                  Artifacts& art) {
  if (!cfg.write_pgm) return;
  int frame = 0;
  for (std::size_t k = 0; k < traj.states.size();
       k += static_cast<std::size_t>(cfg.pgm_every)) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04d.pgm", frame++);
    art.pgm_frame(name, energy_density_field(traj.states[k].u));
  }
}

int center_or(int value, int extent) { return value >= 0 ? value : extent / 2; }

/// e^{-y} I_j(y) via the anchored series, safe for large y.
double scaled_bessel_i(int j, double y) {
  if (y == 0.0) return j == 0 ? 1.0 : 0.0;
  const double peak = 0.5 * (j + std::sqrt(j * j + y * y));
  const int k0 = std::max(0, static_cast<int>(peak));
  auto log_term = [&](int k) {
    return (2.0 * k + j) * std::log(0.5 * y) - std::lgamma(k + 1.0) -
           std::lgamma(k + j + 1.0);
  };
  const double anchor = log_term(k0);
  double sum = 0.0;
  for (int k = k0; k >= 0; --k) {
    const double t = std::exp(log_term(k) - anchor);
    sum += t;
    if (t < 1e-20) break;
  }
  for (int k = k0 + 1; k < k0 + 100000; ++k) {
    const double t = std::exp(log_term(k) - anchor);
    sum += t;
    if (t < 1e-20) break;
  }
  return std::exp(anchor - y) * sum;
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

void run_energy_decay(const ExperimentConfig& cfg, Artifacts& art) {
  const GridSpec grid = cfg.grid_spec();
  const SolverConfig sc = cfg.solver_config();
  const VectorField f = smooth_random_data(grid, *sc.surface, cfg.seed,
                                           cfg.kmax, cfg.amplitude);
  const RunOutput out = run_flow(f, sc);
  art.text_file("energy.csv", energy_csv(out.trace));

  bool monotone = true;
  double worst_rise = 0.0;
  for (std::size_t k = 1; k < out.trace.size(); ++k) {
    const double rise = out.trace[k].energy - out.trace[k - 1].energy;
    worst_rise = std::max(worst_rise, rise);
    if (rise > 0.0) monotone = false;
  }
  double max_off = 0.0;
  for (const EnergySample& s : out.trace)
    max_off = std::max(max_off, s.max_offmanifold);

  Csv summary{"initial_energy", "final_energy", "monotone", "worst_rise",
              "max_offmanifold"};
  summary.row(out.trace.front().energy, out.trace.back().energy, monotone,
              worst_rise, max_off);
  art.text_file("summary.csv", summary.text());

  if (cfg.write_fields) art.field_file("state_final.llgf", out.final_state.u);
  write_frames(cfg, out.traj, art);
}

void run_energy_conservation(const ExperimentConfig& cfg, Artifacts& art) {
  const GridSpec grid = cfg.grid_spec();
  const SolverConfig sc = cfg.solver_config();
  const VectorField f = smooth_random_data(grid, *sc.surface, cfg.seed,
                                           cfg.kmax, cfg.amplitude);
  const RunOutput out = run_flow(f, sc);
  art.text_file("energy.csv", energy_csv(out.trace));

  const double e0 = out.trace.front().energy;
  double drift = 0.0;
  for (const EnergySample& s : out.trace)
    drift = std::max(drift, std::abs(s.energy - e0));
  Csv summary{"initial_energy", "final_energy", "max_rel_drift"};
  summary.row(e0, out.trace.back().energy, e0 > 0.0 ? drift / e0 : drift);
  art.text_file("summary.csv", summary.text());
}

void run_kernel_slopes(const ExperimentConfig& cfg, Artifacts& art) {
  (void)cfg;
  Csv csv{"kernel", "p", "q", "order", "slope", "target", "deviation",
          "pass"};
  const std::pair<const char*, std::complex<double>> kernels[] = {
      {"heat", {1.0, 0.0}}, {"damped-schrodinger", {1.0, 1.0}}};
  for (const auto& [label, coeff] : kernels)
    for (int order = 0; order <= 1; ++order) {
      const EstimateReport r =
          verify_lplq(coeff, 1.0, kInfinity, 1.0, order, 10.0, 1e4, 12);
      csv.row(label, "inf", 1, order, r.slope, r.target,
              std::abs(r.slope - r.target), r.pass());
    }
  art.text_file("slopes.csv", csv.text());
}

void run_kernel_mass(const ExperimentConfig& cfg, Artifacts& art) {
  (void)cfg;
  Csv csv{"kernel", "h", "t_over_h2", "mass_re", "mass_im", "mass_deviation",
          "bessel_rel_deviation"};
  const std::pair<const char*, std::complex<double>> kernels[] = {
      {"heat", {1.0, 0.0}}, {"damped-schrodinger", {1.0, 1.0}}};
  const double factors[] = {0.1, 1.0, 10.0, 100.0};
  const double spacings[] = {1.0, 1.0 / 64.0};
  for (const auto& [label, coeff] : kernels)
    for (double h : spacings)
      for (double x : factors) {
        const Kernel1D k = kernel_1d(x * h * h, h, coeff);
        const std::complex<double> mass = k.mass();
        double bessel_dev = -1.0;
        if (coeff.imag() == 0.0) {
          const double w0 = scaled_bessel_i(0, 2.0 * x) / h;
          bessel_dev = std::abs(k.value(0).real() - w0) / std::abs(w0);
        }
        csv.row(label, h, x, mass.real(), mass.imag(),
                std::abs(mass - 1.0), bessel_dev);
      }
  art.text_file("mass.csv", csv.text());
}

void run_duhamel_oracle(const ExperimentConfig& cfg, Artifacts& art) {
  const GridSpec grid = cfg.grid_spec();
  const double h = grid.h;
  ScalarField mode(grid);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix)
      mode.node(ix, iy) = std::sin(2.0 * std::numbers::pi * grid.x(ix)) *
                          std::cos(2.0 * std::numbers::pi * grid.y(iy));
  const double s1 = std::sin(std::numbers::pi * h);
  const double mu = 8.0 / (h * h) * s1 * s1;
  const auto g = [](double t) { return 1.0 + 0.5 * std::sin(3.0 * t); };
  const auto gp = [](double t) { return 1.5 * std::cos(3.0 * t); };
  const double T = 0.5;

  Csv csv{"steps", "dt", "rel_error_l2", "observed_order"};
  double prev = 0.0;
  for (int steps : {16, 32, 64, 128, 256}) {
    std::vector<double> times(steps + 1);
    std::vector<ScalarField> forcing;
    forcing.reserve(steps + 1);
    for (int i = 0; i <= steps; ++i) {
      times[i] = T * i / steps;
      ScalarField F = mode;
      const double amp = gp(times[i]) + mu * g(times[i]);
      for (double& v : F.values) v *= amp;
      forcing.push_back(std::move(F));
    }
    const ScalarField v = duhamel_solve(mode, forcing, {1.0, 0.0}, times);
    std::vector<double> err2(grid.size()), ref2(grid.size());
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      const double exact = g(T) * mode.values[i];
      err2[i] = (v.values[i] - exact) * (v.values[i] - exact);
      ref2[i] = exact * exact;
    }
    const double rel =
        std::sqrt(pairwise_sum(err2)) / std::sqrt(pairwise_sum(ref2));
    csv.row(steps, T / steps, rel,
            prev > 0.0 ? std::log2(prev / rel) : 0.0);
    prev = rel;
  }
  art.text_file("duhamel.csv", csv.text());
}

double census_field(int which, double x, double y) {
  const double tau = 2.0 * std::numbers::pi;
  if (which == 0) return std::sin(tau * x) * std::sin(tau * y);
  return std::sin(tau * x) + 0.5 * std::cos(2.0 * tau * y) +
         0.25 * std::cos(tau * x) * std::sin(2.0 * tau * y);
}

void run_interpolant_census(const ExperimentConfig& cfg, Artifacts& art) {
  (void)cfg;
  Csv csv{"h", "field", "norm", "lattice", "interpolant", "ratio"};
  for (int n : {16, 32, 64}) {
    GridSpec grid;
    grid.nx = grid.ny = n;
    grid.h = 1.0 / n;
    for (int which = 0; which < 2; ++which) {
      ScalarField u(grid);
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
          u.node(ix, iy) = census_field(which, grid.x(ix), grid.y(iy));
      const ScalarInterpolant p = build_interpolant(u);
      const double l2_lattice = lp_norm(u, 2.0);
      const double l2_interp = interpolant_norms(p, NormKind::L2);
      csv.row(grid.h, which, "L2", l2_lattice, l2_interp,
              l2_interp / l2_lattice);
      const double l4_lattice = lp_norm(u, 4.0);
      const double l4_interp = interpolant_norms(p, NormKind::L4);
      csv.row(grid.h, which, "L4", l4_lattice, l4_interp,
              l4_interp / l4_lattice);
      const double g_lattice = sobolev_norm(u, 1, 2.0, true);
      const double g_interp = interpolant_norms(p, NormKind::GradL2);
      csv.row(grid.h, which, "GradL2", g_lattice, g_interp,
              g_interp / g_lattice);
    }
  }
  art.text_file("census.csv", csv.text());
}

void run_sobolev_census(const ExperimentConfig& cfg, Artifacts& art) {
  (void)cfg;
  Csv csv{"h", "s", "p", "q", "field", "lhs", "norm_u", "norm_grad", "ratio"};
  Csv summary{"s", "h", "C_fitted"};
  const double cases[][3] = {{1.0, 2.0, 2.0}, {2.0, 4.0, 2.0}};
  for (const double* c : cases) {
    for (int n : {16, 32, 64}) {
      GridSpec grid;
      grid.nx = grid.ny = n;
      grid.h = 1.0 / n;
      const CutoffFunction zeta = build_cutoff(grid, n / 2, n / 2, 0.2);
      double fitted = 0.0;
      for (int which = 0; which < 2; ++which) {
        ScalarField u(grid);
        for (int iy = 0; iy < n; ++iy)
          for (int ix = 0; ix < n; ++ix)
            u.node(ix, iy) = census_field(which, grid.x(ix), grid.y(iy));
        const SobolevReport r =
            localized_sobolev_check(u, zeta, c[0], c[1], c[2]);
        csv.row(grid.h, r.s, r.p, r.q, which, r.lhs, r.norm_u, r.norm_grad,
                r.ratio);
        fitted = std::max(fitted, r.ratio);
      }
      summary.row(c[0], grid.h, fitted);
    }
  }
  art.text_file("sobolev.csv", csv.text());
  art.text_file("summary.csv", summary.text());
}

void run_frame_holonomy(const ExperimentConfig& cfg, Artifacts& art) {
  const auto surface = make_surface("sphere");
  const double cos_theta = 0.75;
  const double sin_theta = std::sqrt(1.0 - cos_theta * cos_theta);
  const double expected = 2.0 * std::numbers::pi * (1.0 - cos_theta);
  const double circumference = 2.0 * std::numbers::pi * sin_theta;
  const int m_full = static_cast<int>(std::ceil(circumference / cfg.h));

  Csv csv{"points", "angle", "expected", "rel_error"};
  for (int m : {m_full / 4, m_full / 2, m_full}) {
    std::vector<Vec3> loop;
    loop.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const double phi = 2.0 * std::numbers::pi * i / m;
      loop.push_back(Vec3{sin_theta * std::cos(phi),
                          sin_theta * std::sin(phi), cos_theta});
    }
    const double angle = loop_holonomy(*surface, loop, Vec3{0.0, 1.0, 0.0});
    csv.row(m, angle, expected,
            std::abs(std::abs(angle) - expected) / expected);
  }
  art.text_file("holonomy.csv", csv.text());
}

void run_linearization_residual(const ExperimentConfig& cfg, Artifacts& art) {
  const auto surface = make_surface(cfg.surface);
  Csv csv{"h", "scale", "q_max", "residual_l2", "ratio_max"};
  Csv summary{"h", "exponent", "ratio_max_scale1"};
  for (int n : {16, 32}) {
    GridSpec grid;
    grid.nx = grid.ny = n;
    grid.h = 1.0 / n;
    SolverConfig sc;
    sc.alpha = 1.0;
    sc.surface = surface;
    sc.flow = Flow::LLG;
    sc.dt_policy = DtPolicy::Fixed;
    sc.dt = grid.h * grid.h / 64.0;
    sc.t_end = 2.0 * sc.dt;
    sc.sample_every = 1;
    sc.threads = cfg.threads;

    std::vector<double> log_q, log_r;
    double ratio_scale1 = 0.0;
    for (double scale : {1.0, 0.5, 0.25}) {
      const VectorField f = smooth_random_data(
          grid, *surface, cfg.seed, cfg.kmax, cfg.amplitude * scale);
      const RunOutput out = run_flow(f, sc);
      const LinearizationResidual r =
          linearization_residual(out.traj.states, *surface);
      csv.row(grid.h, scale, r.q_max, r.residual_l2, r.ratio_max);
      log_q.push_back(std::log(r.q_max));
      log_r.push_back(std::log(r.residual_l2));
      if (scale == 1.0) ratio_scale1 = r.ratio_max;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(log_q.size());
    for (std::size_t i = 0; i < log_q.size(); ++i) {
      sx += log_q[i];
      sy += log_r[i];
      sxx += log_q[i] * log_q[i];
      sxy += log_q[i] * log_r[i];
    }
    const double exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    summary.row(grid.h, exponent, ratio_scale1);
  }
  art.text_file("residual.csv", csv.text());
  art.text_file("summary.csv", summary.text());
}

void run_local_energy(const ExperimentConfig& cfg, Artifacts& art) {
  const GridSpec grid = cfg.grid_spec();
  const SolverConfig sc = cfg.solver_config();
  const VectorField f = smooth_random_data(grid, *sc.surface, cfg.seed,
                                           cfg.kmax, cfg.amplitude);
  const RunOutput out = run_flow(f, sc);
  art.text_file("energy.csv", energy_csv(out.trace));

  const int cx = center_or(cfg.ball_cx, grid.nx);
  const int cy = center_or(cfg.ball_cy, grid.ny);
  const LocalEnergyReport report = local_energy_inequality_check(
      out.traj, sc, cx, cy, cfg.ball_R, 0.0, sc.t_end, cfg.C);

  Csv csv{"t", "local_energy", "dissipation_acc", "lhs", "rhs", "slack"};
  for (const LocalEnergyRow& r : report.rows)
    csv.row(r.t, r.local_energy, r.dissipation_acc, r.lhs, r.rhs, r.slack);
  art.text_file("local_energy.csv", csv.text());

  Csv summary{"R", "C_used", "C_fitted", "initial_2R", "total_energy",
              "min_slack", "holds"};
  summary.row(report.R, report.C_used, report.C_fitted, report.initial_2R,
              report.total_energy, report.min_slack, report.holds());
  art.text_file("summary.csv", summary.text());
}

std::string concentration_csv(const ConcentrationReport& report,
                              const GridSpec& grid) {
  Csv csv{"x0", "y0", "t0", "R", "local_energy", "selected"};
  for (const ConcentrationCylinder& c : report.cylinders)
    csv.row(grid.x(c.cx), grid.y(c.cy), c.t, c.radius, c.local_energy,
            c.selected);
  return csv.text();
}

std::string concentration_summary_csv(const ConcentrationReport& report) {
  Csv summary{"eps0",        "delta",           "R0",
              "total_energy", "flagged",        "sum_r2",
              "ledger_bound", "max_per_slice",  "per_slice_bound",
              "disjoint_ok",  "note"};
  summary.row(report.eps0, report.delta, report.R0, report.total_energy,
              static_cast<int>(report.cylinders.size()), report.sum_r2,
              report.ledger_bound, report.max_per_slice,
              report.per_slice_bound, report.disjoint_ok, report.note);
  return summary.text();
}

void run_concentration_bubble(const ExperimentConfig& cfg, Artifacts& art) {
  const GridSpec grid = cfg.grid_spec();
  const double rho = cfg.bubble_rho > 0.0 ? cfg.bubble_rho : 3.0 * grid.h;
  const int cx = center_or(cfg.ball_cx, grid.nx);
  const int cy = center_or(cfg.ball_cy, grid.ny);
  const VectorField f = bubble_data(grid, cx, cy, rho);

  const double eps0 = cfg.eps0_or_default();
  const double total = discrete_energy(f);
  const double delta = cfg.delta > 0.0 ? cfg.delta : eps0 / (2.0 * total);
  const double slice = delta * cfg.R0 * cfg.R0 / 2.0;

  SolverConfig sc = cfg.solver_config();
  sc.dt_policy = DtPolicy::Fixed;
  const int m = std::max(
      1, static_cast<int>(std::ceil((slice / 4.0) / (grid.h * grid.h / 8.0))));
  sc.dt = slice / (4.0 * m);
  sc.sample_every = m;
  sc.t_end = 3.0 * slice;

  const RunOutput out = run_flow(f, sc);
  art.text_file("energy.csv", energy_csv(out.trace));
  const ConcentrationReport report =
      detect_concentration(out.traj, eps0, cfg.R0, delta);
  art.text_file("concentration.csv", concentration_csv(report, grid));
  art.text_file("summary.csv", concentration_summary_csv(report));
  if (cfg.write_fields) art.field_file("state_initial.llgf", f);
  write_frames(cfg, out.traj, art);
}

void run_small_energy_regularity(const ExperimentConfig& cfg, Artifacts& art) {
  const GridSpec grid = cfg.grid_spec();
  const SolverConfig sc = cfg.solver_config();
  const VectorField f = energy_calibrated_data(grid, *sc.surface, cfg.seed,
                                               cfg.kmax, cfg.target_energy);
  const RunOutput out = run_flow(f, sc);
  art.text_file("energy.csv", energy_csv(out.trace));

  const ConcentrationReport report =
      detect_concentration(out.traj, cfg.eps0_or_default(), cfg.R0, cfg.delta);
  art.text_file("concentration.csv", concentration_csv(report, grid));
  art.text_file("concentration_summary.csv",
                concentration_summary_csv(report));

  const int cx = center_or(cfg.ball_cx, grid.nx);
  const int cy = center_or(cfg.ball_cy, grid.ny);
  const auto d2 = second_derivative_trace(out.traj, cx, cy, cfg.ball_R);
  Csv csv{"t", "d2_norm", "y"};
  double max_y = 0.0;
  for (const DerivativeSample& s : d2) {
    csv.row(s.t, s.d2_norm, s.y);
    max_y = std::max(max_y, s.y);
  }
  art.text_file("regularity.csv", csv.text());

  Csv summary{"total_energy", "eps0", "flagged", "max_y"};
  summary.row(report.total_energy, report.eps0,
              static_cast<int>(report.cylinders.size()), max_y);
  art.text_file("summary.csv", summary.text());
}

using Pipeline = void (*)(const ExperimentConfig&, Artifacts&);

struct PipelineEntry {
  const char* name;
  Pipeline fn;
};

const PipelineEntry kPipelines[] = {
    {"energy-decay", run_energy_decay},
    {"energy-conservation", run_energy_conservation},
    {"kernel-slopes", run_kernel_slopes},
    {"kernel-mass", run_kernel_mass},
    {"duhamel-oracle", run_duhamel_oracle},
    {"interpolant-census", run_interpolant_census},
    {"sobolev-census", run_sobolev_census},
    {"frame-holonomy", run_frame_holonomy},
    {"linearization-residual", run_linearization_residual},
    {"local-energy", run_local_energy},
    {"concentration-bubble", run_concentration_bubble},
    {"small-energy-regularity", run_small_energy_regularity},
};

void write_manifest(const RunManifest& m, const Artifacts& art,
                    const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["preset"] = m.preset;
  j["seed"] = m.seed;
  j["status"] = m.status;
  j["error"] = m.error;
  j["config_fnv1a64"] = m.config_hash;
  j["config"] = cfg.canonical_text();
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const FileEntry& e : art.entries()) {
    nlohmann::ordered_json f;
    f["name"] = e.name;
    f["bytes"] = e.bytes;
    f["fnv1a64"] = e.hash;
    files.push_back(f);
  }
  j["files"] = files;
  nlohmann::ordered_json scales = nlohmann::ordered_json::object();
  for (const auto& [name, scale] : art.pgm_scales()) scales[name] = scale;
  j["pgm_scale"] = scales;

  std::ofstream out(m.path, std::ios::binary);
  if (!out) throw std::runtime_error("run: cannot write manifest.json");
  out << j.dump(2) << "\n";
}

}  // namespace

uint64_t fnv1a64(const void* data, std::size_t size) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t hash = 14695981039346656037ull;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= p[i];
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string list_presets_text() {
  std::string out;
  for (const PresetInfo& p : preset_list()) {
    out += p.name;
    out += "\n    ";
    out += p.description;
    out += "\n";
  }
  return out;
}

RunManifest run_experiment(const ExperimentConfig& config,
                           const std::string& out_dir) {
  if (config.preset.empty())
    throw std::invalid_argument(
        "config: preset is required (see list-presets)");
  Pipeline pipeline = nullptr;
  for (const PipelineEntry& e : kPipelines)
    if (config.preset == e.name) pipeline = e.fn;
  if (!pipeline)
    throw std::invalid_argument("run: unknown preset '" + config.preset +
                                "' (see list-presets)");

  fs::create_directories(out_dir);
  LockFile lock(out_dir + "/.lock");
  Artifacts art(out_dir);

  RunManifest manifest;
  manifest.preset = config.preset;
  manifest.seed = config.seed;
  const std::string echo = config.canonical_text();
  manifest.config_hash = hex64(fnv1a64(echo.data(), echo.size()));
  manifest.path = out_dir + "/manifest.json";

  try {
    config.validate();
    pipeline(config, art);
  } catch (const std::exception& e) {
    manifest.status = "failed";
    manifest.error = e.what();
    for (const FileEntry& f : art.entries()) manifest.files.push_back(f.name);
    write_manifest(manifest, art, config);
    throw;
  }
  manifest.status = "ok";
  for (const FileEntry& f : art.entries()) manifest.files.push_back(f.name);
  write_manifest(manifest, art, config);
  return manifest;
}

VectorField smooth_random_data(const GridSpec& grid,
                               const Hypersurface& surface, uint64_t seed,
                               int kmax, double amplitude) {
  grid.validate();
  const Vec3 p0 = surface.anchor_point();
  const Vec3 n0 = surface.normal(p0);

  // Mean-zero trig polynomial per component, deterministic draw order.
  struct Mode {
    int kx, ky;
    double amp, phase;
  };
  Rng rng(seed);
  std::vector<Mode> modes[3];
  for (int c = 0; c < 3; ++c)
    for (int kx = -kmax; kx <= kmax; ++kx)
      for (int ky = -kmax; ky <= kmax; ++ky) {
        if (kx == 0 && ky == 0) continue;
        const double weight = 1.0 / (kx * kx + ky * ky);
        modes[c].push_back(Mode{kx, ky, weight * rng.symmetric(),
                                rng.uniform(0.0, 2.0 * std::numbers::pi)});
      }

  const double lx = grid.extent_x();
  const double ly = grid.extent_y();
  Lattice<Vec3> raw(grid);
  double vmax = 0.0;
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      Vec3 v{0.0, 0.0, 0.0};
      for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (const Mode& mo : modes[c])
          s += mo.amp *
               std::cos(2.0 * std::numbers::pi *
                            (mo.kx * grid.x(ix) / lx + mo.ky * grid.y(iy) / ly) +
                        mo.phase);
        (c == 0 ? v.x : c == 1 ? v.y : v.z) = s;
      }
      v -= n0 * dot(v, n0);  // tangent displacement at the base point
      raw.node(ix, iy) = v;
      vmax = std::max(vmax, v.norm());
    }
  const double rescale = vmax > 0.0 ? amplitude / vmax : 0.0;

  VectorField u(grid);
  u.far_value = p0;
  for (std::size_t i = 0; i < u.values.size(); ++i)
    u.values[i] = surface.closest_point(p0 + raw.values[i] * rescale);
  return u;
}

VectorField bubble_data(const GridSpec& grid, int cx, int cy, double rho) {
  grid.validate();
  if (!(rho > 0.0))
    throw std::invalid_argument("bubble_data: rho must be > 0");
  if (cx < 0 || cx >= grid.nx || cy < 0 || cy >= grid.ny)
    throw std::invalid_argument("bubble_data: center outside grid");
  VectorField u(grid);
  u.far_value = Vec3{0.0, 0.0, -1.0};
  const double x0 = grid.x(cx);
  const double y0 = grid.y(cy);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double X = grid.min_image(grid.x(ix) - x0, grid.extent_x()) / rho;
      const double Y = grid.min_image(grid.y(iy) - y0, grid.extent_y()) / rho;
      const double r2 = X * X + Y * Y;
      u.node(ix, iy) =
          Vec3{2.0 * X, 2.0 * Y, 1.0 - r2} / (1.0 + r2);
    }
  return u;
}

VectorField energy_calibrated_data(const GridSpec& grid,
                                   const Hypersurface& surface, uint64_t seed,
                                   int kmax, double target_energy) {
  if (!(target_energy > 0.0))
    throw std::invalid_argument(
        "energy_calibrated_data: target energy must be > 0");
  const auto energy_at = [&](double a) {
    return discrete_energy(smooth_random_data(grid, surface, seed, kmax, a));
  };
  double hi = 0.1;
  int grow = 0;
  while (energy_at(hi) < target_energy) {
    hi *= 2.0;
    if (++grow > 40)
      throw std::runtime_error(
          "energy_calibrated_data: cannot reach the target energy");
  }
  double lo = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double e = energy_at(mid);
    if (std::abs(e - target_energy) <= 1e-10 * target_energy) {
      lo = hi = mid;
      break;
    }
    (e < target_energy ? lo : hi) = mid;
  }
  return smooth_random_data(grid, surface, seed, kmax, 0.5 * (lo + hi));
}

}  // namespace llg
