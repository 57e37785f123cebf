#pragma once

#include <complex>
#include <vector>

#include "llg/grid.hpp"

namespace llg {

/// One axis of the lattice fundamental solution of d/dt = coeff * Lap_h,
/// started from the scaled delta (1/h) delta_0. Entries cover offsets
/// j in [-radius, radius]; the mass beyond the window is below 1e-14 of the
/// total. coeff = 1 is the heat kernel, coeff = alpha + i the damped
/// Schrodinger kernel.
struct Kernel1D {
  double h = 0.0;
  double t = 0.0;
  std::complex<double> coeff{1.0, 0.0};
  int radius = 0;
  std::vector<std::complex<double>> values;  ///< values[j + radius]

  std::complex<double> value(int j) const {
    if (j < -radius || j > radius) return {0.0, 0.0};
    return values[static_cast<std::size_t>(j + radius)];
  }
  /// h * sum_j values_j; equals 1 exactly in exact arithmetic.
  std::complex<double> mass() const;
  double max_abs() const;
};

/// Product kernel: one Kernel1D per axis (d = factors.size(), 1 or 2).
struct KernelD {
  std::vector<Kernel1D> factors;
};

Kernel1D kernel_1d(double t, double h, std::complex<double> coeff);
KernelD kernel_2d(double t, double h, std::complex<double> coeff);

/// (h sum_j |w_j|^r)^{1/r}; max |w_j| for r = infinity.
double kernel_lp_norm(const Kernel1D& k, double r);
/// Same norm of the forward difference (w_{j+1} - w_j)/h.
double kernel_grad_lp_norm(const Kernel1D& k, double r);

/// Separable discrete convolution (h-weighted per axis) of the product
/// kernel with a field; the solution operator of the linear flow at the
/// kernel's time. Real-valued fields require the kernel to be real up to
/// roundoff. Periodic grids fold the kernel across the period (exact);
/// far-field grids use ghost values.
ScalarField apply_kernel(const KernelD& k, const ScalarField& f);
VectorField apply_kernel(const KernelD& k, const VectorField& f);
ComplexField apply_kernel(const KernelD& k, const ComplexField& f);

/// Solution of d/dt u = coeff Lap_h u + F at t = times.back() from u(0) = f,
/// with F sampled at the uniform mesh `times` (times.front() = 0). The
/// forcing integral uses the midpoint rule per mesh interval with F at the
/// midpoint approximated by the endpoint average.
ScalarField duhamel_solve(const ScalarField& f,
                          const std::vector<ScalarField>& forcing,
                          std::complex<double> coeff,
                          const std::vector<double>& times);
VectorField duhamel_solve(const VectorField& f,
                          const std::vector<VectorField>& forcing,
                          std::complex<double> coeff,
                          const std::vector<double>& times);

/// Measured time decay of the solution-operator norm between weighted
/// lattice spaces, fitted as a log-log slope over geometric sample times.
struct EstimateReport {
  std::complex<double> coeff;
  double h = 0.0;
  double p = 0.0;
  double q = 0.0;
  int order = 0;
  std::vector<double> times;
  std::vector<double> norms;
  double slope = 0.0;
  double intercept = 0.0;
  double target = 0.0;
  double tolerance = 0.05;
  bool pass() const;
};

/// For 1 <= q <= p <= infinity, measures the L^r_h norm of the 2-D kernel
/// (Young exponent 1 + 1/p = 1/r + 1/q), or of its first differences for
/// derivative order 1, over `samples` geometric times in [t_min, t_max].
/// Target slope is -(1/q - 1/p) - order/2 (d = 2). Requires Re(coeff) > 0.
EstimateReport verify_lplq(std::complex<double> coeff, double h, double p,
                           double q, int derivative_order, double t_min,
                           double t_max, int samples = 12);

}  // namespace llg
