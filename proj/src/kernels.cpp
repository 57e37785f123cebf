#include "llg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "llg/reduce.hpp"

namespace llg {

namespace {

constexpr long kWindowMax = 1000000;
constexpr double kTailBudget = 1e-14;
// Log of the worst acceptable cancellation of the direct power series. Above
// it (strong oscillation, weak damping) the kernel is assembled by repeated
// self-convolution from a shorter time via the semigroup property, which
// keeps every stage well conditioned.
constexpr double kCancelBudget = 16.0;

/// Window radius with Poisson/Gaussian tail below ~1e-15 of the mass.
int series_window(std::complex<double> z) {
  const double az = std::abs(z);
  const double rz = z.real();
  double j;
  if (rz > 1e-12) {
    // magnitude envelope ~ exp(-rz j^2 / (2 az)^2 * 2) per axis; 12.33 sigma
    j = 12.33 * az / std::sqrt(rz);
  } else {
    // purely oscillatory: light cone |j| ~ 2|z| plus transition width
    j = 2.0 * az + 14.0 * (std::cbrt(az) + 1.0);
  }
  const long r = static_cast<long>(std::ceil(j)) + 16;
  if (r > kWindowMax)
    throw std::runtime_error("kernel: truncation window exceeds 10^6");
  return static_cast<int>(r);
}

/// h * w_j for j >= 0: anchored log-scaled evaluation of
///   e^{-2z} sum_{k >= j} z^{2k-j} / (k! (k-j)!).
/// The anchor is the largest term; the ratio recurrence walks outward from
/// it in both directions so every scaled term stays in range.
std::complex<double> series_entry(std::complex<double> z, int j) {
  const double az = std::abs(z);
  if (az == 0.0) return j == 0 ? std::complex<double>{1.0, 0.0}
                               : std::complex<double>{0.0, 0.0};
  const double kp =
      0.5 * (j + std::sqrt(static_cast<double>(j) * j + 4.0 * az * az));
  const long kstar = std::max<long>(j, std::lround(kp) - 1);
  const double log_anchor = (2.0 * kstar - j) * std::log(az) -
                            std::lgamma(static_cast<double>(kstar) + 1.0) -
                            std::lgamma(static_cast<double>(kstar - j) + 1.0);
  const std::complex<double> z2 = z * z;

  KahanSum sre, sim;
  sre.add(1.0);  // anchor term, scaled to magnitude 1 with phase folded out
  std::complex<double> term{1.0, 0.0};
  for (long k = kstar;; ++k) {
    term *= z2 / (static_cast<double>(k + 1) * static_cast<double>(k + 1 - j));
    if (std::abs(term.real()) + std::abs(term.imag()) < 1e-22) break;
    sre.add(term.real());
    sim.add(term.imag());
  }
  term = {1.0, 0.0};
  for (long k = kstar; k > std::max(0, j);) {
    term *= (static_cast<double>(k) * static_cast<double>(k - j)) / z2;
    --k;
    if (std::abs(term.real()) + std::abs(term.imag()) < 1e-22) break;
    sre.add(term.real());
    sim.add(term.imag());
  }

  const double theta = std::arg(z);
  const double phase = theta * (2.0 * kstar - j) - 2.0 * z.imag();
  const double mag = std::exp(log_anchor - 2.0 * z.real());
  return std::polar(mag, phase) * std::complex<double>{sre.value(),
                                                       sim.value()};
}

/// h-scaled kernel values over [-radius, radius]; symmetric in j <-> -j.
std::vector<std::complex<double>> build_series(std::complex<double> z,
                                               int radius) {
  std::vector<std::complex<double>> hw(2 * static_cast<std::size_t>(radius) +
                                       1);
  for (int j = 0; j <= radius; ++j) {
    const std::complex<double> e = series_entry(z, j);
    hw[static_cast<std::size_t>(radius + j)] = e;
    hw[static_cast<std::size_t>(radius - j)] = e;
  }
  return hw;
}

/// Geometric extrapolation of the edge decay against the total mass.
bool tail_ok(const std::vector<std::complex<double>>& hw) {
  double total = 0.0;
  for (const auto& c : hw) total += std::abs(c);
  const std::size_t n = hw.size();
  if (n < 3) return true;
  const double a = std::abs(hw[n - 1]);
  const double b = std::abs(hw[n - 2]);
  if (a == 0.0) return true;
  if (!(b > 0.0) || a >= b) return false;
  const double ratio = a / b;
  const double tail = 2.0 * a * ratio / (1.0 - ratio);
  return tail <= kTailBudget * std::max(total, 1e-300);
}

std::vector<std::complex<double>> build_checked(std::complex<double> z,
                                                int& radius) {
  std::vector<std::complex<double>> hw = build_series(z, radius);
  if (tail_ok(hw)) return hw;
  const long grown = std::lround(radius * 1.5) + 8;
  if (grown > kWindowMax)
    throw std::runtime_error("kernel: truncation window exceeds 10^6");
  radius = static_cast<int>(grown);
  hw = build_series(z, radius);
  if (!tail_ok(hw))
    throw std::runtime_error("kernel: series truncation not converged");
  return hw;
}

/// Self-convolution of h-scaled values: h w_{2t,j} = sum_m (h w_m)(h w_{j-m}).
std::vector<std::complex<double>> self_convolve(
    const std::vector<std::complex<double>>& hw, int rin, int rout) {
  std::vector<std::complex<double>> out(2 * static_cast<std::size_t>(rout) +
                                        1);
  for (int j = -rout; j <= rout; ++j) {
    const int mlo = std::max(-rin, j - rin);
    const int mhi = std::min(rin, j + rin);
    KahanSum re, im;
    for (int m = mlo; m <= mhi; ++m) {
      const std::complex<double> p =
          hw[static_cast<std::size_t>(m + rin)] *
          hw[static_cast<std::size_t>(j - m + rin)];
      re.add(p.real());
      im.add(p.imag());
    }
    out[static_cast<std::size_t>(j + rout)] = {re.value(), im.value()};
  }
  return out;
}

}  // namespace

std::complex<double> Kernel1D::mass() const {
  KahanSum re, im;
  for (const auto& c : values) {
    re.add(c.real());
    im.add(c.imag());
  }
  return std::complex<double>{re.value(), im.value()} * h;
}

double Kernel1D::max_abs() const {
  double m = 0.0;
  for (const auto& c : values) m = std::max(m, std::abs(c));
  return m;
}

Kernel1D kernel_1d(double t, double h, std::complex<double> coeff) {
  if (!(h > 0.0)) throw std::invalid_argument("kernel.h must be > 0");
  if (!(t >= 0.0)) throw std::invalid_argument("kernel.t must be >= 0");
  const bool damped = coeff.real() > 0.0;
  const bool undamped = coeff.real() == 0.0 && coeff.imag() == 1.0;
  if (!damped && !undamped)
    throw std::invalid_argument(
        "kernel: coefficient must have positive real part (or equal i)");

  Kernel1D k;
  k.h = h;
  k.t = t;
  k.coeff = coeff;
  if (t == 0.0) {
    k.radius = 0;
    k.values = {std::complex<double>{1.0 / h, 0.0}};
    return k;
  }

  const std::complex<double> z = coeff * (t / (h * h));
  const double cancel = 2.0 * (std::abs(z) - z.real());
  if (undamped && cancel > kCancelBudget)
    throw std::domain_error(
        "kernel: undamped coefficient limited to t <= 8 h^2");

  std::vector<std::complex<double>> hw;
  int radius = 0;
  if (cancel <= kCancelBudget) {
    radius = series_window(z);
    hw = build_checked(z, radius);
  } else {
    const int halvings = static_cast<int>(
        std::ceil(std::log2(cancel / kCancelBudget)));
    std::complex<double> zb = z / static_cast<double>(1L << halvings);
    radius = series_window(zb);
    hw = build_checked(zb, radius);
    std::complex<double> zcur = zb;
    for (int i = 0; i < halvings; ++i) {
      zcur *= 2.0;
      const int rout = std::min(2 * radius, series_window(zcur));
      hw = self_convolve(hw, radius, rout);
      radius = rout;
    }
    if (!tail_ok(hw))
      throw std::runtime_error("kernel: truncation not converged");
  }

  k.radius = radius;
  k.values.resize(hw.size());
  const double inv_h = 1.0 / h;
  for (std::size_t i = 0; i < hw.size(); ++i) k.values[i] = hw[i] * inv_h;
  return k;
}

KernelD kernel_2d(double t, double h, std::complex<double> coeff) {
  KernelD k;
  k.factors.push_back(kernel_1d(t, h, coeff));
  k.factors.push_back(k.factors.front());
  return k;
}

double kernel_lp_norm(const Kernel1D& k, double r) {
  if (std::isinf(r)) return k.max_abs();
  if (!(r >= 1.0))
    throw std::invalid_argument("kernel_lp_norm: r must be >= 1");
  std::vector<double> terms(k.values.size());
  for (std::size_t i = 0; i < k.values.size(); ++i)
    terms[i] = std::pow(std::abs(k.values[i]), r);
  return std::pow(k.h * pairwise_sum(terms), 1.0 / r);
}

double kernel_grad_lp_norm(const Kernel1D& k, double r) {
  const std::size_t n = k.values.size() + 1;
  std::vector<std::complex<double>> dw(n);
  const double inv_h = 1.0 / k.h;
  for (std::size_t i = 0; i < n; ++i) {
    const int j = static_cast<int>(i) - k.radius - 1;
    dw[i] = (k.value(j + 1) - k.value(j)) * inv_h;
  }
  if (std::isinf(r)) {
    double m = 0.0;
    for (const auto& c : dw) m = std::max(m, std::abs(c));
    return m;
  }
  if (!(r >= 1.0))
    throw std::invalid_argument("kernel_grad_lp_norm: r must be >= 1");
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = std::pow(std::abs(dw[i]), r);
  return std::pow(k.h * pairwise_sum(terms), 1.0 / r);
}

namespace {

int mod_positive(int a, int n) {
  const int m = a % n;
  return m < 0 ? m + n : m;
}

/// One-axis h-weighted convolution with weight type W (double for real
/// fields, complex for complex fields).
template <class W, class T>
void convolve_axis(const GridSpec& g, Axis axis, const std::vector<W>& hw,
                   int radius, const std::vector<T>& in, const T& far,
                   std::vector<T>& out) {
  const int n = axis == Axis::X1 ? g.nx : g.ny;
  const int lines = axis == Axis::X1 ? g.ny : g.nx;
  const int stride = axis == Axis::X1 ? 1 : g.nx;
  const int line_stride = axis == Axis::X1 ? g.nx : 1;

  if (g.boundary == Boundary::Periodic) {
    std::vector<W> circ(static_cast<std::size_t>(n), W{});
    for (int m = -radius; m <= radius; ++m)
      circ[static_cast<std::size_t>(mod_positive(m, n))] +=
          hw[static_cast<std::size_t>(m + radius)];
    for (int l = 0; l < lines; ++l) {
      const int base = l * line_stride;
      for (int i = 0; i < n; ++i) {
        T acc{};
        for (int s = 0; s < n; ++s) {
          const int src = i - s < 0 ? i - s + n : i - s;
          acc += in[static_cast<std::size_t>(base + src * stride)] *
                 circ[static_cast<std::size_t>(s)];
        }
        out[static_cast<std::size_t>(base + i * stride)] = acc;
      }
    }
  } else {
    for (int l = 0; l < lines; ++l) {
      const int base = l * line_stride;
      for (int i = 0; i < n; ++i) {
        T acc{};
        for (int m = -radius; m <= radius; ++m) {
          const int src = i - m;
          const T& v = (src < 0 || src >= n)
                           ? far
                           : in[static_cast<std::size_t>(base + src * stride)];
          acc += v * hw[static_cast<std::size_t>(m + radius)];
        }
        out[static_cast<std::size_t>(base + i * stride)] = acc;
      }
    }
  }
}

/// Real part of the h-scaled weights; rejects genuinely complex kernels.
std::vector<double> real_weights(const Kernel1D& k) {
  double max_im = 0.0;
  for (const auto& c : k.values) max_im = std::max(max_im, std::abs(c.imag()));
  if (max_im > 1e-12 * std::max(k.max_abs(), 1e-300))
    throw std::invalid_argument(
        "apply_kernel: complex kernel applied to a real-valued field");
  std::vector<double> hw(k.values.size());
  for (std::size_t i = 0; i < k.values.size(); ++i)
    hw[i] = k.values[i].real() * k.h;
  return hw;
}

std::vector<std::complex<double>> complex_weights(const Kernel1D& k) {
  std::vector<std::complex<double>> hw(k.values.size());
  for (std::size_t i = 0; i < k.values.size(); ++i) hw[i] = k.values[i] * k.h;
  return hw;
}

void require_two_factors(const KernelD& k, double h) {
  if (k.factors.size() != 2)
    throw std::invalid_argument("apply_kernel: need a 2-D product kernel");
  for (const Kernel1D& f : k.factors)
    if (std::abs(f.h - h) > 1e-12 * h)
      throw std::invalid_argument("apply_kernel: kernel/grid spacing mismatch");
}

template <class W, class T>
Lattice<T> apply_impl(const KernelD& k, const Lattice<T>& f,
                      std::vector<W> (*weights)(const Kernel1D&)) {
  require_two_factors(k, f.spec.h);
  const std::vector<W> w0 = weights(k.factors[0]);
  const std::vector<W> w1 = weights(k.factors[1]);
  Lattice<T> mid(f.spec);
  Lattice<T> out(f.spec);
  convolve_axis<W, T>(f.spec, Axis::X1, w0, k.factors[0].radius, f.values,
                      f.far_value, mid.values);
  // Convolving the constant far line scales it by the kernel mass.
  W mass0{};
  for (const W& c : w0) mass0 += c;
  mid.far_value = f.far_value * mass0;
  convolve_axis<W, T>(f.spec, Axis::X2, w1, k.factors[1].radius, mid.values,
                      mid.far_value, out.values);
  W mass1{};
  for (const W& c : w1) mass1 += c;
  out.far_value = mid.far_value * mass1;
  return out;
}

}  // namespace

ScalarField apply_kernel(const KernelD& k, const ScalarField& f) {
  return apply_impl<double, double>(k, f, &real_weights);
}

VectorField apply_kernel(const KernelD& k, const VectorField& f) {
  return apply_impl<double, Vec3>(k, f, &real_weights);
}

ComplexField apply_kernel(const KernelD& k, const ComplexField& f) {
  return apply_impl<std::complex<double>, std::complex<double>>(
      k, f, &complex_weights);
}

namespace {

template <class Field>
Field duhamel_impl(const Field& f, const std::vector<Field>& forcing,
                   std::complex<double> coeff,
                   const std::vector<double>& times) {
  if (times.size() < 2 || forcing.size() != times.size())
    throw std::invalid_argument("duhamel_solve: forcing/times mismatch");
  if (std::abs(times.front()) > 1e-12)
    throw std::invalid_argument("duhamel_solve: times must start at 0");
  const double dtau = times[1] - times[0];
  if (!(dtau > 0.0))
    throw std::invalid_argument("duhamel_solve: times must increase");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (std::abs(times[i + 1] - times[i] - dtau) > 1e-9 * dtau)
      throw std::invalid_argument("duhamel_solve: times must be a uniform mesh");
  for (const Field& g : forcing)
    require_same_spec(g.spec, f.spec, "duhamel_solve");

  const double t_final = times.back();
  Field acc = apply_kernel(kernel_2d(t_final, f.spec.h, coeff), f);
  Field g(f.spec);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double mid = 0.5 * (times[i] + times[i + 1]);
    for (std::size_t n = 0; n < g.values.size(); ++n)
      g.values[n] = (forcing[i].values[n] + forcing[i + 1].values[n]) *
                    (0.5 * dtau);
    const Field part = apply_kernel(kernel_2d(t_final - mid, f.spec.h, coeff),
                                    g);
    for (std::size_t n = 0; n < acc.values.size(); ++n)
      acc.values[n] += part.values[n];
  }
  return acc;
}

}  // namespace

ScalarField duhamel_solve(const ScalarField& f,
                          const std::vector<ScalarField>& forcing,
                          std::complex<double> coeff,
                          const std::vector<double>& times) {
  return duhamel_impl(f, forcing, coeff, times);
}

VectorField duhamel_solve(const VectorField& f,
                          const std::vector<VectorField>& forcing,
                          std::complex<double> coeff,
                          const std::vector<double>& times) {
  return duhamel_impl(f, forcing, coeff, times);
}

bool EstimateReport::pass() const {
  return std::abs(slope - target) <= tolerance;
}

EstimateReport verify_lplq(std::complex<double> coeff, double h, double p,
                           double q, int derivative_order, double t_min,
                           double t_max, int samples) {
  if (!(coeff.real() > 0.0))
    throw std::invalid_argument(
        "verify_lplq: coefficient must have positive real part");
  if (!(h > 0.0)) throw std::invalid_argument("verify_lplq: h must be > 0");
  if (!(q >= 1.0) || !(p >= q))
    throw std::invalid_argument("verify_lplq: need 1 <= q <= p");
  if (derivative_order != 0 && derivative_order != 1)
    throw std::invalid_argument(
        "verify_lplq: derivative order must be 0 or 1");
  if (samples < 10)
    throw std::invalid_argument("verify_lplq: need at least 10 samples");
  if (!(t_min > 0.0) || !(t_max >= 10.0 * t_min))
    throw std::invalid_argument("verify_lplq: time range too short");

  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  const double iq = std::isinf(q) ? 0.0 : 1.0 / q;
  const double ir = 1.0 + ip - iq;  // Young: 1 + 1/p = 1/r + 1/q
  const double r = ir <= 1e-12 ? kInfinity : 1.0 / ir;

  EstimateReport rep;
  rep.coeff = coeff;
  rep.h = h;
  rep.p = p;
  rep.q = q;
  rep.order = derivative_order;
  rep.target = -(iq - ip) - 0.5 * derivative_order;

  const double ratio = std::pow(t_max / t_min, 1.0 / (samples - 1));
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = t_min * std::pow(ratio, i);
    const Kernel1D w = kernel_1d(t, h, coeff);
    const double nw = kernel_lp_norm(w, r);
    const double norm = derivative_order == 0
                            ? nw * nw
                            : 4.0 * kernel_grad_lp_norm(w, r) * nw;
    rep.times.push_back(t);
    rep.norms.push_back(norm);
    const double lx = std::log(t);
    const double ly = std::log(norm);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = samples;
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  rep.intercept = (sy - rep.slope * sx) / n;
  return rep;
}

}  // namespace llg
