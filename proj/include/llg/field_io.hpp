#pragma once

#include <string>

#include "llg/grid.hpp"

namespace llg {

/// Binary snapshot format "LLGF": magic 'L','L','G','F'; u32 version = 1;
/// u32 nx; u32 ny; f64 h; u8 boundary code; then nx*ny*3 f64 node values in
/// row-major order. All integers and doubles little-endian.
void write_llgf(const std::string& path, const VectorField& u);
VectorField read_llgf(const std::string& path);

/// 8-bit binary PGM (P5) of a scalar density, linearly mapped so that the
/// per-frame maximum lands on 255. Returns the scale (value mapped to 255).
double write_pgm(const std::string& path, const ScalarField& density);

}  // namespace llg
