#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llg/dynamics.hpp"
#include "llg/grid.hpp"

namespace llg {

/// Flat view of an INI-style experiment config. Every run starts from a
/// preset; a config file selects the preset with a top-level `preset = name`
/// line and may override any key below it.
struct ExperimentConfig {
  std::string preset;
  uint64_t seed = 1;
  int threads = 1;

  // [grid]
  int nx = 64;
  int ny = 64;
  double h = 1.0 / 64.0;
  std::string boundary = "periodic";  ///< periodic | far-field
  double far_x = 0.0, far_y = 0.0, far_z = 1.0;

  // [target]
  std::string surface = "sphere";  ///< sphere | ellipsoid:a,b,c | torus:R,r

  // [solver]
  std::string flow = "llg";  ///< llg | heat
  double alpha = 1.0;
  std::string dt_policy = "cfl";  ///< cfl | fixed
  double dt = 0.0;
  double cfl = 0.125;
  std::string projection = "nearest";  ///< nearest | none
  double t_end = 0.25;
  int sample_every = 64;

  // [data]
  std::string data = "smooth-random";  ///< smooth-random | bubble | constant
  double amplitude = 0.75;
  int kmax = 3;
  double bubble_rho = 0.0;     ///< bubble width; 0 selects 3h
  double target_energy = 0.0;  ///< > 0: bisect amplitude to hit this E_h[f]

  // [analysis]
  double eps0 = 0.0;  ///< 0 selects the default 0.3 * 4 pi
  double delta = 0.0;
  double R0 = 0.25;
  double ball_R = 0.25;
  int ball_cx = -1;  ///< -1 selects the grid center
  int ball_cy = -1;
  double C = 0.0;

  // [output]
  bool write_fields = true;
  bool write_pgm = false;
  int pgm_every = 1;  ///< in stored samples

  GridSpec grid_spec() const;
  Vec3 far_field() const { return Vec3{far_x, far_y, far_z}; }
  SolverConfig solver_config() const;
  double eps0_or_default() const;

  /// Checks every module precondition reachable from the config so a run
  /// fails before any artifact is written. Errors name the offending key.
  void validate() const;

  /// Canonical INI echo of the effective configuration.
  std::string canonical_text() const;
};

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> preset_list();

/// Parses INI text: `[section]` headers, `key = value` lines, `#`/`;`
/// comments. A top-level `preset` key pulls in that preset's values first;
/// unknown sections or keys are errors naming the key.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig preset_config(const std::string& name);

ExperimentConfig load_config_file(const std::string& path);

}  // namespace llg
