#pragma once

#include <utility>
#include <vector>

#include "llg/grid.hpp"

namespace llg {

enum class NormKind { L2, GradL2, L4 };

/// Piecewise-bilinear interpolant of a lattice function: on the cell with
/// lower-left node j it equals
///   u_j + D+1 u_j (x - j1 h) + D+2 u_j (y - j2 h)
///       + D+1 D+2 u_j (x - j1 h)(y - j2 h),
/// which matches all four cell corners, so it is continuous across cell
/// interfaces. Periodic grids carry nx*ny wrapped cells; far-field grids the
/// (nx-1)*(ny-1) interior cells, with the far value outside.
template <class T>
struct BilinearInterpolantT {
  GridSpec spec;
  int cells_x = 0;
  int cells_y = 0;
  std::vector<T> a0, a1, a2, a3;  ///< per-cell coefficients, row-major
  T far_value{};

  T evaluate(double x, double y) const;
  /// (d/dx, d/dy); zero outside a far-field domain.
  std::pair<T, T> gradient(double x, double y) const;
};

using ScalarInterpolant = BilinearInterpolantT<double>;
using VectorInterpolant = BilinearInterpolantT<Vec3>;

ScalarInterpolant build_interpolant(const ScalarField& u);
VectorInterpolant build_interpolant(const VectorField& u);

/// Exact domain integrals per cell: 2x2 Gauss for L2 and GradL2 (integrand
/// degree <= 2 per variable), 4x4 Gauss for L4 (degree <= 4 per variable).
double interpolant_norms(const ScalarInterpolant& p, NormKind which);
double interpolant_norms(const VectorInterpolant& p, NormKind which);

/// Radial cutoff sampled on the grid: 1 inside B_R(center), 0 outside
/// B_2R(center), quintic-smoothstep transition in between. The gradient and
/// Laplacian bounds are measured on the sample and recorded as
/// |D1 zeta| <= k1/R and |Lap_h zeta| <= k2/R^2.
struct CutoffFunction {
  int cx = 0;
  int cy = 0;
  double R = 0.0;
  ScalarField zeta;
  double k1 = 0.0;
  double k2 = 0.0;
};

CutoffFunction build_cutoff(const GridSpec& spec, int cx, int cy, double R);

/// One evaluation of the localized interpolation inequality
///   || |u|^2 zeta ||_{2s}  <=  C ||u||_{L^p(Omega)} ||D1(u zeta)||_q,
/// Omega = {zeta > 0}, for exponents with (s+1)/(2s) = 1/p + 1/q.
struct SobolevReport {
  double s = 0.0;
  double p = 0.0;
  double q = 0.0;
  double lhs = 0.0;
  double norm_u = 0.0;
  double norm_grad = 0.0;
  double ratio = 0.0;  ///< lhs / (norm_u * norm_grad); 0 when rhs vanishes
};

SobolevReport localized_sobolev_check(const VectorField& u,
                                      const CutoffFunction& zeta, double s,
                                      double p, double q);
SobolevReport localized_sobolev_check(const ScalarField& u,
                                      const CutoffFunction& zeta, double s,
                                      double p, double q);

/// ||grad p_h(. + delta) - grad p_h||_{L2} for delta = (kx h, ky h), exact
/// via the interpolant of the shifted-minus-original field (integer-shift
/// equivariance). Periodic grids only.
double gradient_translation_diff(const VectorField& u, int kx, int ky);

/// One row of a ratio census export: columns h, lhs, rhs, ratio.
struct CensusRow {
  double h = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

}  // namespace llg
