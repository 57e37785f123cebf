#include "llg/interpolant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "llg/reduce.hpp"

namespace llg {

namespace {

// Gauss-Legendre nodes/weights on [0, 1].
constexpr double kG2Node = 0.28867513459481287;  // 1/(2 sqrt(3))
const double kGauss2[2] = {0.5 - kG2Node, 0.5 + kG2Node};
const double kGauss2W[2] = {0.5, 0.5};

const double kGauss4[4] = {
    0.5 - 0.5 * 0.8611363115940526, 0.5 - 0.5 * 0.3399810435848563,
    0.5 + 0.5 * 0.3399810435848563, 0.5 + 0.5 * 0.8611363115940526};
const double kGauss4W[4] = {
    0.5 * 0.34785484513745385, 0.5 * 0.6521451548625461,
    0.5 * 0.6521451548625461, 0.5 * 0.34785484513745385};

double sq_abs(double v) { return v * v; }
double sq_abs(const Vec3& v) { return v.norm2(); }

template <class T>
BilinearInterpolantT<T> build_impl(const Lattice<T>& u) {
  BilinearInterpolantT<T> p;
  p.spec = u.spec;
  p.far_value = u.far_value;
  const bool periodic = u.spec.boundary == Boundary::Periodic;
  p.cells_x = periodic ? u.spec.nx : u.spec.nx - 1;
  p.cells_y = periodic ? u.spec.ny : u.spec.ny - 1;
  const std::size_t n =
      static_cast<std::size_t>(p.cells_x) * static_cast<std::size_t>(p.cells_y);
  p.a0.resize(n);
  p.a1.resize(n);
  p.a2.resize(n);
  p.a3.resize(n);
  const double inv_h = 1.0 / u.spec.h;
  for (int iy = 0; iy < p.cells_y; ++iy)
    for (int ix = 0; ix < p.cells_x; ++ix) {
      const std::size_t c = static_cast<std::size_t>(iy) *
                                static_cast<std::size_t>(p.cells_x) +
                            static_cast<std::size_t>(ix);
      const T u00 = u.at(ix, iy);
      const T u10 = u.at(ix + 1, iy);
      const T u01 = u.at(ix, iy + 1);
      const T u11 = u.at(ix + 1, iy + 1);
      p.a0[c] = u00;
      p.a1[c] = (u10 - u00) * inv_h;
      p.a2[c] = (u01 - u00) * inv_h;
      p.a3[c] = (u11 - u10 - u01 + u00) * (inv_h * inv_h);
    }
  return p;
}

/// Locate (x, y): cell index plus local offsets in [0, h]. Returns false
/// when the point lies outside a far-field domain.
template <class T>
bool locate(const BilinearInterpolantT<T>& p, double x, double y,
            std::size_t& cell, double& xi, double& eta) {
  const double h = p.spec.h;
  if (p.spec.boundary == Boundary::Periodic) {
    const double ex = p.spec.extent_x();
    const double ey = p.spec.extent_y();
    x = std::fmod(x, ex);
    if (x < 0.0) x += ex;
    y = std::fmod(y, ey);
    if (y < 0.0) y += ey;
  } else if (x < 0.0 || y < 0.0 || x > p.cells_x * h || y > p.cells_y * h) {
    return false;
  }
  int ix = std::min(static_cast<int>(x / h), p.cells_x - 1);
  int iy = std::min(static_cast<int>(y / h), p.cells_y - 1);
  if (ix < 0) ix = 0;
  if (iy < 0) iy = 0;
  cell = static_cast<std::size_t>(iy) * static_cast<std::size_t>(p.cells_x) +
         static_cast<std::size_t>(ix);
  xi = x - ix * h;
  eta = y - iy * h;
  return true;
}

}  // namespace

template <class T>
T BilinearInterpolantT<T>::evaluate(double x, double y) const {
  std::size_t c;
  double xi, eta;
  if (!locate(*this, x, y, c, xi, eta)) return far_value;
  return a0[c] + a1[c] * xi + a2[c] * eta + a3[c] * (xi * eta);
}

template <class T>
std::pair<T, T> BilinearInterpolantT<T>::gradient(double x, double y) const {
  std::size_t c;
  double xi, eta;
  if (!locate(*this, x, y, c, xi, eta)) return {T{}, T{}};
  return {a1[c] + a3[c] * eta, a2[c] + a3[c] * xi};
}

template struct BilinearInterpolantT<double>;
template struct BilinearInterpolantT<Vec3>;

ScalarInterpolant build_interpolant(const ScalarField& u) {
  return build_impl(u);
}
VectorInterpolant build_interpolant(const VectorField& u) {
  return build_impl(u);
}

namespace {

template <class T>
double norms_impl(const BilinearInterpolantT<T>& p, NormKind which) {
  const double h = p.spec.h;
  const std::size_t n = p.a0.size();
  std::vector<double> terms(n);
  switch (which) {
    case NormKind::L2:
      for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            const double xi = kGauss2[a] * h;
            const double eta = kGauss2[b] * h;
            const T v = p.a0[c] + p.a1[c] * xi + p.a2[c] * eta +
                        p.a3[c] * (xi * eta);
            acc += kGauss2W[a] * kGauss2W[b] * sq_abs(v);
          }
        terms[c] = acc * h * h;
      }
      return std::sqrt(pairwise_sum(terms));
    case NormKind::GradL2:
      for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            const double xi = kGauss2[a] * h;
            const double eta = kGauss2[b] * h;
            const T gx = p.a1[c] + p.a3[c] * eta;
            const T gy = p.a2[c] + p.a3[c] * xi;
            acc += kGauss2W[a] * kGauss2W[b] * (sq_abs(gx) + sq_abs(gy));
          }
        terms[c] = acc * h * h;
      }
      return std::sqrt(pairwise_sum(terms));
    case NormKind::L4:
      for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            const double xi = kGauss4[a] * h;
            const double eta = kGauss4[b] * h;
            const T v = p.a0[c] + p.a1[c] * xi + p.a2[c] * eta +
                        p.a3[c] * (xi * eta);
            const double v2 = sq_abs(v);
            acc += kGauss4W[a] * kGauss4W[b] * v2 * v2;
          }
        terms[c] = acc * h * h;
      }
      return std::pow(pairwise_sum(terms), 0.25);
  }
  throw std::invalid_argument("interpolant_norms: unsupported norm");
}

}  // namespace

double interpolant_norms(const ScalarInterpolant& p, NormKind which) {
  return norms_impl(p, which);
}
double interpolant_norms(const VectorInterpolant& p, NormKind which) {
  return norms_impl(p, which);
}

CutoffFunction build_cutoff(const GridSpec& spec, int cx, int cy, double R) {
  spec.validate();
  if (!(R > spec.h))
    throw std::invalid_argument("cutoff: R must exceed the grid spacing");
  if (cx < 0 || cx >= spec.nx || cy < 0 || cy >= spec.ny)
    throw std::invalid_argument("cutoff: center outside grid");
  const double half = 0.5 * std::min(spec.extent_x(), spec.extent_y());
  if (spec.boundary == Boundary::Periodic && !(2.0 * R <= half))
    throw std::invalid_argument("cutoff: 2R must fit in half the domain");

  CutoffFunction zf;
  zf.cx = cx;
  zf.cy = cy;
  zf.R = R;
  zf.zeta = ScalarField(spec);
  const double x0 = spec.x(cx);
  const double y0 = spec.y(cy);
  for (int iy = 0; iy < spec.ny; ++iy)
    for (int ix = 0; ix < spec.nx; ++ix) {
      const double dx = spec.min_image(spec.x(ix) - x0, spec.extent_x());
      const double dy = spec.min_image(spec.y(iy) - y0, spec.extent_y());
      const double rho = std::hypot(dx, dy);
      double v;
      if (rho <= R) {
        v = 1.0;
      } else if (rho >= 2.0 * R) {
        v = 0.0;
      } else {
        const double s = (rho - R) / R;  // in (0, 1)
        v = 1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
      }
      zf.zeta.node(ix, iy) = v;
    }

  double max_d1 = 0.0;
  for (const MultiIndex& a : multi_indices(1, true))
    max_d1 = std::max(max_d1, lp_norm(multi_diff(zf.zeta, a), kInfinity));
  zf.k1 = max_d1 * R;
  zf.k2 = lp_norm(laplacian_h(zf.zeta), kInfinity) * R * R;
  return zf;
}

namespace {

template <class T>
SobolevReport sobolev_impl(const Lattice<T>& u, const CutoffFunction& zeta,
                           double s, double p, double q) {
  require_same_spec(u.spec, zeta.zeta.spec, "localized_sobolev_check");
  if (!(s >= 1.0))
    throw std::invalid_argument("localized_sobolev_check: s must be >= 1");
  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  const double iq = std::isinf(q) ? 0.0 : 1.0 / q;
  if (std::abs((s + 1.0) / (2.0 * s) - (ip + iq)) > 1e-12)
    throw std::invalid_argument(
        "localized_sobolev_check: exponents must satisfy (s+1)/(2s) = 1/p + "
        "1/q");

  SobolevReport rep;
  rep.s = s;
  rep.p = p;
  rep.q = q;

  ScalarField g(u.spec);
  Lattice<T> w(u.spec);
  std::vector<double> restricted;
  restricted.reserve(u.values.size());
  double max_restricted = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double z = zeta.zeta.values[i];
    const double a = detail::value_abs(u.values[i]);
    g.values[i] = a * a * z;
    w.values[i] = u.values[i] * z;
    if (z > 0.0) {
      max_restricted = std::max(max_restricted, a);
      if (!std::isinf(p)) restricted.push_back(std::pow(a, p));
    }
  }
  rep.lhs = lp_norm(g, 2.0 * s);
  rep.norm_u =
      std::isinf(p)
          ? max_restricted
          : std::pow(u.spec.h * u.spec.h * pairwise_sum(restricted), ip);
  rep.norm_grad = sobolev_norm(w, 1, q, /*homogeneous=*/true);
  const double rhs = rep.norm_u * rep.norm_grad;
  rep.ratio = rhs > 0.0 ? rep.lhs / rhs : 0.0;
  return rep;
}

}  // namespace

SobolevReport localized_sobolev_check(const VectorField& u,
                                      const CutoffFunction& zeta, double s,
                                      double p, double q) {
  return sobolev_impl(u, zeta, s, p, q);
}

SobolevReport localized_sobolev_check(const ScalarField& u,
                                      const CutoffFunction& zeta, double s,
                                      double p, double q) {
  return sobolev_impl(u, zeta, s, p, q);
}

double gradient_translation_diff(const VectorField& u, int kx, int ky) {
  if (u.spec.boundary != Boundary::Periodic)
    throw std::invalid_argument(
        "gradient_translation_diff: periodic grids only");
  VectorField d(u.spec);
  for (int iy = 0; iy < u.spec.ny; ++iy)
    for (int ix = 0; ix < u.spec.nx; ++ix)
      d.node(ix, iy) = u.at(ix + kx, iy + ky) - u.node(ix, iy);
  return interpolant_norms(build_interpolant(d), NormKind::GradL2);
}

}  // namespace llg
