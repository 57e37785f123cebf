#include "llg/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "llg/target.hpp"

namespace llg {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* want) {
  throw std::invalid_argument("config: " + key + ": expected " + want +
                              ", got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto r = std::from_chars(first, last, out);
  if (r.ec != std::errc() || r.ptr != last) bad_value(key, value, "a number");
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto r = std::from_chars(first, last, out);
  if (r.ec != std::errc() || r.ptr != last) bad_value(key, value, "an integer");
  return out;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  uint64_t out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto r = std::from_chars(first, last, out);
  if (r.ec != std::errc() || r.ptr != last)
    bad_value(key, value, "an unsigned integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "a boolean (true/false)");
}

void apply_key(ExperimentConfig& cfg, const std::string& section,
               const std::string& key, const std::string& value) {
  const std::string full = section.empty() ? key : section + "." + key;
  if (section.empty()) {
    if (key == "preset") cfg.preset = value;
    else if (key == "seed") cfg.seed = parse_u64(full, value);
    else if (key == "threads") cfg.threads = parse_int(full, value);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "grid") {
    if (key == "nx") cfg.nx = parse_int(full, value);
    else if (key == "ny") cfg.ny = parse_int(full, value);
    else if (key == "h") cfg.h = parse_double(full, value);
    else if (key == "boundary") cfg.boundary = value;
    else if (key == "far_x") cfg.far_x = parse_double(full, value);
    else if (key == "far_y") cfg.far_y = parse_double(full, value);
    else if (key == "far_z") cfg.far_z = parse_double(full, value);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "target") {
    if (key == "surface") cfg.surface = value;
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "solver") {
    if (key == "flow") cfg.flow = value;
    else if (key == "alpha") cfg.alpha = parse_double(full, value);
    else if (key == "dt_policy") cfg.dt_policy = value;
    else if (key == "dt") cfg.dt = parse_double(full, value);
    else if (key == "cfl") cfg.cfl = parse_double(full, value);
    else if (key == "projection") cfg.projection = value;
    else if (key == "t_end") cfg.t_end = parse_double(full, value);
    else if (key == "sample_every") cfg.sample_every = parse_int(full, value);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "data") {
    if (key == "data") cfg.data = value;
    else if (key == "amplitude") cfg.amplitude = parse_double(full, value);
    else if (key == "kmax") cfg.kmax = parse_int(full, value);
    else if (key == "bubble_rho") cfg.bubble_rho = parse_double(full, value);
    else if (key == "target_energy")
      cfg.target_energy = parse_double(full, value);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "analysis") {
    if (key == "eps0") cfg.eps0 = parse_double(full, value);
    else if (key == "delta") cfg.delta = parse_double(full, value);
    else if (key == "R0") cfg.R0 = parse_double(full, value);
    else if (key == "ball_R") cfg.ball_R = parse_double(full, value);
    else if (key == "ball_cx") cfg.ball_cx = parse_int(full, value);
    else if (key == "ball_cy") cfg.ball_cy = parse_int(full, value);
    else if (key == "C") cfg.C = parse_double(full, value);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "output") {
    if (key == "write_fields") cfg.write_fields = parse_bool(full, value);
    else if (key == "write_pgm") cfg.write_pgm = parse_bool(full, value);
    else if (key == "pgm_every") cfg.pgm_every = parse_int(full, value);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else {
    throw std::invalid_argument("config: unknown section '[" + section + "]'");
  }
}

/// Applies key = value lines on top of cfg. When scan_preset_only is set,
/// only looks for a top-level preset name and touches nothing else.
void apply_text(ExperimentConfig& cfg, const std::string& text,
                bool scan_preset_only) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  ": empty key");
    if (scan_preset_only) {
      if (section.empty() && key == "preset") cfg.preset = value;
      continue;
    }
    apply_key(cfg, section, key, value);
  }
}

struct PresetText {
  const char* name;
  const char* description;
  const char* text;
};

const PresetText kPresets[] = {
    {"energy-decay",
     "damped precessional flow on the sphere; energy trace must decay",
     R"(preset = energy-decay
seed = 101
[grid]
nx = 64
ny = 64
h = 0.015625
boundary = periodic
[target]
surface = sphere
[solver]
flow = llg
alpha = 1
dt_policy = cfl
cfl = 0.125
t_end = 0.25
sample_every = 64
[data]
data = smooth-random
amplitude = 0.75
kmax = 3
[output]
write_fields = true
write_pgm = true
pgm_every = 64
)"},
    {"energy-conservation",
     "undamped precession (alpha = 0); energy drift must stay near zero",
     R"(preset = energy-conservation
seed = 202
[grid]
nx = 32
ny = 32
h = 0.03125
[target]
surface = sphere
[solver]
flow = llg
alpha = 0
dt_policy = cfl
cfl = 0.0625
t_end = 1.0
sample_every = 256
[data]
data = smooth-random
amplitude = 0.6
kmax = 2
[output]
write_fields = false
write_pgm = false
)"},
    {"kernel-slopes",
     "fitted L^p-L^q time-decay slopes of the lattice kernels",
     R"(preset = kernel-slopes
seed = 1
[output]
write_fields = false
)"},
    {"kernel-mass",
     "kernel mass conservation and the j = 0 Bessel value",
     R"(preset = kernel-mass
seed = 1
[output]
write_fields = false
)"},
    {"duhamel-oracle",
     "forced lattice heat equation vs a manufactured closed-form solution",
     R"(preset = duhamel-oracle
seed = 1
[grid]
nx = 32
ny = 32
h = 0.03125
[output]
write_fields = false
)"},
    {"interpolant-census",
     "lattice-vs-interpolant norm ratios across a spacing ladder",
     R"(preset = interpolant-census
seed = 404
[output]
write_fields = false
)"},
    {"sobolev-census",
     "localized interpolation-inequality constants across a spacing ladder",
     R"(preset = sobolev-census
seed = 505
[output]
write_fields = false
)"},
    {"frame-holonomy",
     "transported-frame rotation around a spherical cap vs its solid angle",
     R"(preset = frame-holonomy
seed = 1
[grid]
h = 0.015625
[output]
write_fields = false
)"},
    {"linearization-residual",
     "cubic smallness of the frame-linearized flow on the torus",
     R"(preset = linearization-residual
seed = 606
[target]
surface = torus:2,0.5
[solver]
flow = llg
alpha = 1
[data]
data = smooth-random
amplitude = 0.15
kmax = 1
[output]
write_fields = false
)"},
    {"local-energy",
     "local energy inequality monitoring on a small-energy heat flow",
     R"(preset = local-energy
seed = 707
[grid]
nx = 32
ny = 32
h = 0.03125
[target]
surface = sphere
[solver]
flow = heat
alpha = 1
dt_policy = cfl
cfl = 0.125
t_end = 0.0625
sample_every = 64
[data]
data = smooth-random
amplitude = 0.3
kmax = 2
[analysis]
ball_R = 0.25
C = 0
[output]
write_fields = false
)"},
    {"concentration-bubble",
     "concentration detector on a degree-1 bubble; expects flagged cylinders",
     R"(preset = concentration-bubble
seed = 808
[grid]
nx = 64
ny = 64
h = 0.015625
[target]
surface = sphere
[solver]
flow = heat
alpha = 1
[data]
data = bubble
bubble_rho = 0
[analysis]
R0 = 0.25
[output]
write_fields = true
write_pgm = true
pgm_every = 4
)"},
    {"small-energy-regularity",
     "below-threshold data; detector must stay empty and derivatives bounded",
     R"(preset = small-energy-regularity
seed = 909
[grid]
nx = 32
ny = 32
h = 0.03125
[target]
surface = sphere
[solver]
flow = heat
alpha = 1
dt_policy = cfl
cfl = 0.125
t_end = 0.0625
sample_every = 128
[data]
data = smooth-random
kmax = 2
target_energy = 1.8849555921538759
[analysis]
R0 = 0.25
ball_R = 0.3
[output]
write_fields = false
)"},
};

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

GridSpec ExperimentConfig::grid_spec() const {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.h = h;
  if (boundary == "periodic")
    g.boundary = Boundary::Periodic;
  else if (boundary == "far-field")
    g.boundary = Boundary::ConstantFarField;
  else
    throw std::invalid_argument(
        "config: grid.boundary must be 'periodic' or 'far-field', got '" +
        boundary + "'");
  g.validate();
  return g;
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig sc;
  sc.alpha = alpha;
  sc.surface = make_surface(surface);
  if (flow == "llg")
    sc.flow = Flow::LLG;
  else if (flow == "heat")
    sc.flow = Flow::HeatFlow;
  else
    throw std::invalid_argument(
        "config: solver.flow must be 'llg' or 'heat', got '" + flow + "'");
  if (dt_policy == "cfl")
    sc.dt_policy = DtPolicy::Cfl;
  else if (dt_policy == "fixed")
    sc.dt_policy = DtPolicy::Fixed;
  else
    throw std::invalid_argument(
        "config: solver.dt_policy must be 'cfl' or 'fixed', got '" +
        dt_policy + "'");
  if (projection == "nearest")
    sc.projection = ProjectionMode::NearestPoint;
  else if (projection == "none")
    sc.projection = ProjectionMode::None;
  else
    throw std::invalid_argument(
        "config: solver.projection must be 'nearest' or 'none', got '" +
        projection + "'");
  sc.dt = dt;
  sc.cfl = cfl;
  sc.t_end = t_end;
  sc.sample_every = sample_every;
  sc.threads = threads;
  return sc;
}

double ExperimentConfig::eps0_or_default() const {
  return eps0 > 0.0 ? eps0 : 0.3 * 4.0 * std::numbers::pi;
}

void ExperimentConfig::validate() const {
  grid_spec();
  solver_config().validate();
  if (threads < 1)
    throw std::invalid_argument("config: threads must be >= 1");
  if (data != "smooth-random" && data != "bubble" && data != "constant")
    throw std::invalid_argument(
        "config: data.data must be smooth-random, bubble, or constant, "
        "got '" + data + "'");
  if (!(amplitude >= 0.0))
    throw std::invalid_argument("config: data.amplitude must be >= 0");
  if (kmax < 0 || kmax > 8)
    throw std::invalid_argument("config: data.kmax must be in [0, 8]");
  if (!(bubble_rho >= 0.0))
    throw std::invalid_argument("config: data.bubble_rho must be >= 0");
  if (!(target_energy >= 0.0))
    throw std::invalid_argument("config: data.target_energy must be >= 0");
  if (!(eps0 >= 0.0))
    throw std::invalid_argument("config: analysis.eps0 must be >= 0");
  if (!(delta >= 0.0))
    throw std::invalid_argument("config: analysis.delta must be >= 0");
  if (!(R0 > 0.0))
    throw std::invalid_argument("config: analysis.R0 must be > 0");
  if (!(ball_R > 0.0))
    throw std::invalid_argument("config: analysis.ball_R must be > 0");
  if (ball_cx < -1 || ball_cx >= nx)
    throw std::invalid_argument("config: analysis.ball_cx out of range");
  if (ball_cy < -1 || ball_cy >= ny)
    throw std::invalid_argument("config: analysis.ball_cy out of range");
  if (!(C >= 0.0))
    throw std::invalid_argument("config: analysis.C must be >= 0");
  if (pgm_every < 1)
    throw std::invalid_argument("config: output.pgm_every must be >= 1");
}

std::string ExperimentConfig::canonical_text() const {
  std::string s;
  s += "preset = " + preset + "\n";
  s += "seed = " + std::to_string(seed) + "\n";
  s += "threads = " + std::to_string(threads) + "\n";
  s += "\n[grid]\n";
  s += "nx = " + std::to_string(nx) + "\n";
  s += "ny = " + std::to_string(ny) + "\n";
  s += "h = " + fmt_g(h) + "\n";
  s += "boundary = " + boundary + "\n";
  s += "far_x = " + fmt_g(far_x) + "\n";
  s += "far_y = " + fmt_g(far_y) + "\n";
  s += "far_z = " + fmt_g(far_z) + "\n";
  s += "\n[target]\n";
  s += "surface = " + surface + "\n";
  s += "\n[solver]\n";
  s += "flow = " + flow + "\n";
  s += "alpha = " + fmt_g(alpha) + "\n";
  s += "dt_policy = " + dt_policy + "\n";
  s += "dt = " + fmt_g(dt) + "\n";
  s += "cfl = " + fmt_g(cfl) + "\n";
  s += "projection = " + projection + "\n";
  s += "t_end = " + fmt_g(t_end) + "\n";
  s += "sample_every = " + std::to_string(sample_every) + "\n";
  s += "\n[data]\n";
  s += "data = " + data + "\n";
  s += "amplitude = " + fmt_g(amplitude) + "\n";
  s += "kmax = " + std::to_string(kmax) + "\n";
  s += "bubble_rho = " + fmt_g(bubble_rho) + "\n";
  s += "target_energy = " + fmt_g(target_energy) + "\n";
  s += "\n[analysis]\n";
  s += "eps0 = " + fmt_g(eps0_or_default()) + "\n";
  s += "delta = " + fmt_g(delta) + "\n";
  s += "R0 = " + fmt_g(R0) + "\n";
  s += "ball_R = " + fmt_g(ball_R) + "\n";
  s += "ball_cx = " + std::to_string(ball_cx) + "\n";
  s += "ball_cy = " + std::to_string(ball_cy) + "\n";
  s += "C = " + fmt_g(C) + "\n";
  s += "\n[output]\n";
  s += std::string("write_fields = ") + (write_fields ? "true" : "false") +
       "\n";
  s += std::string("write_pgm = ") + (write_pgm ? "true" : "false") + "\n";
  s += "pgm_every = " + std::to_string(pgm_every) + "\n";
  return s;
}

std::vector<PresetInfo> preset_list() {
  std::vector<PresetInfo> out;
  for (const PresetText& p : kPresets)
    out.push_back(PresetInfo{p.name, p.description});
  return out;
}

ExperimentConfig preset_config(const std::string& name) {
  for (const PresetText& p : kPresets)
    if (name == p.name) {
      ExperimentConfig cfg;
      apply_text(cfg, p.text, false);
      return cfg;
    }
  throw std::invalid_argument("config: unknown preset '" + name +
                              "' (see list-presets)");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig probe;
  apply_text(probe, text, true);
  ExperimentConfig cfg =
      probe.preset.empty() ? ExperimentConfig{} : preset_config(probe.preset);
  apply_text(cfg, text, false);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config(body.str());
}

}  // namespace llg
