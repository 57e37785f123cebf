#pragma once

#include <complex>
#include <vector>

#include "llg/dynamics.hpp"
#include "llg/grid.hpp"
#include "llg/target.hpp"

namespace llg {

/// Orthonormal tangent pair per node with e2 = nu ^ e1; the complex
/// structure acts as i e1 = e2.
struct FrameField {
  GridSpec spec;
  std::vector<Vec3> e1;
  std::vector<Vec3> e2;

  const Vec3& e1_at(int ix, int iy) const { return e1[spec.index(ix, iy)]; }
  const Vec3& e2_at(int ix, int iy) const { return e2[spec.index(ix, iy)]; }
};

/// Frame by discrete parallel transport (project to the new tangent plane
/// and renormalize per edge), propagated along row 0 and then up each
/// column. Path dependence is intrinsic; loop_holonomy measures it.
FrameField transport_frame(const VectorField& u, const Hypersurface& surface,
                           const Vec3& seed);

/// Frame from the target's global section (torus), evaluated node-wise.
FrameField pullback_global_frame(const VectorField& u,
                                 const Hypersurface& surface);

/// Transport a tangent seed around a closed loop of on-surface points and
/// return the signed angle (about the normal at loop[0]) between the
/// returned vector and the seed.
double loop_holonomy(const Hypersurface& surface,
                     const std::vector<Vec3>& loop, const Vec3& seed);

/// Difference derivatives split into tangent and normal parts in the frame:
/// q^{+-k} = D_{+-k}u . e1 + i D_{+-k}u . e2, a^{+-k} = D_{+-k}u . nu.
/// Index 0 holds axis 1, index 1 axis 2.
struct ComplexDerivativeField {
  GridSpec spec;
  ComplexField q_plus[2];
  ComplexField q_minus[2];
  ScalarField a_plus[2];
  ScalarField a_minus[2];
};

ComplexDerivativeField decompose(const VectorField& u,
                                 const FrameField& frames,
                                 const Hypersurface& surface);

/// Residual of the linearized evolution of the tangent coordinate for the
/// alpha = 1 flow: R = dq/dt (centered in time) - (1+i) Lap_h q, evaluated
/// for q^{+1} and q^{+2} at the middle state of a uniform-dt trajectory.
/// The node-wise ratio divides |R| by the cubic/gradient reference scale
/// max_l |q_l|^3 + max_l |q_l||D1 q_l| over the node and its four nearest
/// neighbors; nodes with negligible scale (or, when the frame must be
/// transported, within 4h of the periodic seam) are skipped.
struct LinearizationResidual {
  GridSpec spec;
  double dt = 0.0;
  ComplexField residual_1;
  ComplexField residual_2;
  ScalarField scale;
  ScalarField ratio;
  double q_max = 0.0;
  double residual_l2 = 0.0;
  double ratio_max = 0.0;  ///< the fitted bound constant
};

LinearizationResidual linearization_residual(const std::vector<State>& states,
                                             const Hypersurface& surface);

}  // namespace llg
