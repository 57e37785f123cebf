#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llg/analysis.hpp"
#include "llg/config.hpp"
#include "llg/target.hpp"

namespace llg {

struct RunManifest {
  std::string preset;
  uint64_t seed = 0;
  std::string status;  ///< "ok" or "failed"
  std::string error;
  std::string config_hash;  ///< FNV-1a 64 of the canonical config text, hex
  std::vector<std::string> files;  ///< emitted artifacts, manifest excluded
  std::string path;                ///< where manifest.json was written
};

/// FNV-1a 64-bit content hash.
uint64_t fnv1a64(const void* data, std::size_t size);

std::string list_presets_text();

/// Executes the preset pipeline named by config.preset into out_dir: takes
/// the directory lock, writes the artifacts, and writes manifest.json last.
/// A module failure still writes a manifest (status "failed", partial
/// artifacts listed) before the exception propagates.
RunManifest run_experiment(const ExperimentConfig& config,
                           const std::string& out_dir);

/// On-surface field from a mean-zero trigonometric perturbation: the base
/// point's tangent plane is displaced by a random trig polynomial with modes
/// up to kmax (scaled so the max displacement equals `amplitude`) and pulled
/// back with closest_point. Deterministic in the seed.
VectorField smooth_random_data(const GridSpec& grid,
                               const Hypersurface& surface, uint64_t seed,
                               int kmax, double amplitude);

/// Degree-1 inverse-stereographic sphere bubble of width rho centered at
/// node (cx, cy); energy concentrates within a few rho of the center.
VectorField bubble_data(const GridSpec& grid, int cx, int cy, double rho);

/// smooth_random_data with the amplitude bisected until E_h equals
/// target_energy (relative tolerance 1e-10).
VectorField energy_calibrated_data(const GridSpec& grid,
                                   const Hypersurface& surface, uint64_t seed,
                                   int kmax, double target_energy);

}  // namespace llg
