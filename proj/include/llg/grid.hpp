#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "llg/reduce.hpp"
#include "llg/vec3.hpp"

namespace llg {

enum class Boundary : std::uint8_t { Periodic = 0, ConstantFarField = 1 };

/// Difference axes. X1 walks the fast (row) index, X2 the slow one.
enum class Axis : int { X1 = 1, X2 = 2 };

enum class DiffKind { Forward, Backward, Centered };

/// Uniform 2-D grid: nx*ny nodes at spacing h, node (ix, iy) sits at
/// (ix*h, iy*h). Edge neighbors resolve per the boundary rule: periodic wrap
/// or ghost nodes clamped to a per-field constant far value.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  Boundary boundary = Boundary::Periodic;

  void validate() const {
    if (!(h > 0.0)) throw std::invalid_argument("grid.h must be > 0");
    if (nx < 4) throw std::invalid_argument("grid.nx must be >= 4");
    if (ny < 4) throw std::invalid_argument("grid.ny must be >= 4");
  }
  std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(ix);
  }
  double x(int ix) const { return ix * h; }
  double y(int iy) const { return iy * h; }
  double extent_x() const { return nx * h; }
  double extent_y() const { return ny * h; }

  /// Minimum-image displacement between node coordinates along one axis.
  double min_image(double d, double extent) const {
    if (boundary != Boundary::Periodic) return d;
    d = std::fmod(d, extent);
    if (d > 0.5 * extent) d -= extent;
    if (d < -0.5 * extent) d += extent;
    return d;
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) = default;
};

namespace detail {
inline int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}
inline double value_abs(double v) { return std::abs(v); }
inline double value_abs(const std::complex<double>& v) { return std::abs(v); }
inline double value_abs(const Vec3& v) { return v.norm(); }
inline double value_dot(double a, double b) { return a * b; }
inline double value_dot(const Vec3& a, const Vec3& b) { return a.dot(b); }
}  // namespace detail

/// Node values of type T on a GridSpec. far_value supplies the ghost value
/// outside the grid when boundary == ConstantFarField.
template <class T>
struct Lattice {
  GridSpec spec;
  std::vector<T> values;
  T far_value{};

  Lattice() = default;
  explicit Lattice(const GridSpec& s, T fill = T{}, T far = T{})
      : spec(s), values(), far_value(far) {
    spec.validate();
    values.assign(spec.size(), fill);
  }

  T& node(int ix, int iy) { return values[spec.index(ix, iy)]; }
  const T& node(int ix, int iy) const { return values[spec.index(ix, iy)]; }

  /// Neighbor lookup; (ix, iy) may lie outside the grid, in which case the
  /// boundary rule decides the value.
  T at(int ix, int iy) const {
    if (ix >= 0 && ix < spec.nx && iy >= 0 && iy < spec.ny)
      return values[spec.index(ix, iy)];
    if (spec.boundary == Boundary::Periodic)
      return values[spec.index(detail::wrap(ix, spec.nx),
                               detail::wrap(iy, spec.ny))];
    return far_value;
  }
};

using VectorField = Lattice<Vec3>;
using ScalarField = Lattice<double>;
using ComplexField = Lattice<std::complex<double>>;

inline void require_same_spec(const GridSpec& a, const GridSpec& b,
                              const char* who) {
  if (!(a == b))
    throw std::invalid_argument(std::string(who) + ": incompatible grids");
}

/// D_{+i}, D_{-i}, D_{0i}: one-sided differences over spacing h and their
/// average. The far value of the result is zero (difference of a constant).
template <class T>
Lattice<T> diff(const Lattice<T>& f, Axis axis, DiffKind kind) {
  Lattice<T> out(f.spec);
  const int dx = axis == Axis::X1 ? 1 : 0;
  const int dy = axis == Axis::X2 ? 1 : 0;
  const double inv_h = 1.0 / f.spec.h;
  const double inv_2h = 0.5 * inv_h;
  for (int iy = 0; iy < f.spec.ny; ++iy) {
    for (int ix = 0; ix < f.spec.nx; ++ix) {
      T v{};
      switch (kind) {
        case DiffKind::Forward:
          v = (f.at(ix + dx, iy + dy) - f.node(ix, iy)) * inv_h;
          break;
        case DiffKind::Backward:
          v = (f.node(ix, iy) - f.at(ix - dx, iy - dy)) * inv_h;
          break;
        case DiffKind::Centered:
          v = (f.at(ix + dx, iy + dy) - f.at(ix - dx, iy - dy)) * inv_2h;
          break;
      }
      out.node(ix, iy) = v;
    }
  }
  return out;
}

/// Five-point discrete Laplacian, sum over both axes of the second
/// difference (u_{j+1} - 2u_j + u_{j-1}) / h^2.
template <class T>
Lattice<T> laplacian_h(const Lattice<T>& f) {
  Lattice<T> out(f.spec);
  const double inv_h2 = 1.0 / (f.spec.h * f.spec.h);
  for (int iy = 0; iy < f.spec.ny; ++iy) {
    for (int ix = 0; ix < f.spec.nx; ++ix) {
      const T c = f.node(ix, iy);
      T v = f.at(ix + 1, iy) + f.at(ix - 1, iy) + f.at(ix, iy + 1) +
            f.at(ix, iy - 1) - 4.0 * c;
      out.node(ix, iy) = v * inv_h2;
    }
  }
  return out;
}

/// Multi-index of difference operators: (p1, m1) forward/backward counts on
/// axis 1, (p2, m2) on axis 2. |alpha| = p1 + m1 + p2 + m2.
struct MultiIndex {
  int p1 = 0;
  int m1 = 0;
  int p2 = 0;
  int m2 = 0;
  int order() const { return p1 + m1 + p2 + m2; }
};

template <class T>
Lattice<T> multi_diff(const Lattice<T>& f, const MultiIndex& a) {
  Lattice<T> out = f;
  for (int i = 0; i < a.p1; ++i) out = diff(out, Axis::X1, DiffKind::Forward);
  for (int i = 0; i < a.m1; ++i) out = diff(out, Axis::X1, DiffKind::Backward);
  for (int i = 0; i < a.p2; ++i) out = diff(out, Axis::X2, DiffKind::Forward);
  for (int i = 0; i < a.m2; ++i) out = diff(out, Axis::X2, DiffKind::Backward);
  return out;
}

/// All multi-indices with |alpha| = k (homogeneous) or |alpha| <= k, in a
/// fixed deterministic order.
std::vector<MultiIndex> multi_indices(int k, bool homogeneous);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Weighted lattice norm (h^2 sum |u_j|^p)^{1/p}; plain max for p = infinity.
template <class T>
double lp_norm(const Lattice<T>& f, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (const T& v : f.values) m = std::max(m, detail::value_abs(v));
    return m;
  }
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  const double h2 = f.spec.h * f.spec.h;
  std::vector<double> terms(f.values.size());
  if (p == 2.0) {
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      const double a = detail::value_abs(f.values[i]);
      terms[i] = a * a;
    }
  } else {
    for (std::size_t i = 0; i < f.values.size(); ++i)
      terms[i] = std::pow(detail::value_abs(f.values[i]), p);
  }
  return std::pow(h2 * pairwise_sum(terms), 1.0 / p);
}

/// (u, v)_{L^2_h} = h^2 sum_j u_j . v_j
template <class T>
double inner_l2h(const Lattice<T>& u, const Lattice<T>& v) {
  require_same_spec(u.spec, v.spec, "inner_l2h");
  std::vector<double> terms(u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i)
    terms[i] = detail::value_dot(u.values[i], v.values[i]);
  return u.spec.h * u.spec.h * pairwise_sum(terms);
}

/// W^{k,p}_h norm: sum over |alpha| <= k (or = k when homogeneous) of
/// ||D^alpha u||_{L^p_h}. Only k <= 2 is supported.
template <class T>
double sobolev_norm(const Lattice<T>& f, int k, double p,
                    bool homogeneous = false) {
  if (k < 0 || k > 2)
    throw std::invalid_argument("sobolev_norm: k > 2 unsupported");
  double total = 0.0;
  for (const MultiIndex& a : multi_indices(k, homogeneous))
    total += lp_norm(multi_diff(f, a), p);
  return total;
}

}  // namespace llg
