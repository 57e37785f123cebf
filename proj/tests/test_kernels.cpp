#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "llg/grid.hpp"
#include "llg/kernels.hpp"
#include "llg/rng.hpp"

using namespace llg;

namespace {

constexpr double kTwoPi = 6.283185307179586;

/// I_0(2x) = sum_k x^{2k} / (k!)^2, summed until the terms vanish; safe in
/// double precision up to x = 100 (I_0(200) ~ 2e84).
double bessel_i0_2x(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 400; ++k) {
    term *= (x / k) * (x / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

ScalarField smooth_mode(const GridSpec& g, int kx, int ky) {
  ScalarField f(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      f.node(ix, iy) = std::sin(kTwoPi * kx * ix / g.nx) +
                       0.5 * std::cos(kTwoPi * ky * iy / g.ny);
  return f;
}

ScalarField random_field(const GridSpec& g, uint64_t seed) {
  Rng rng(seed);
  ScalarField f(g);
  for (double& v : f.values) v = rng.symmetric();
  return f;
}

}  // namespace

TEST_CASE("kernel construction") {
  SUBCASE("t = 0 is the scaled delta") {
    for (double h : {1.0, 0.125}) {
      const Kernel1D k = kernel_1d(0.0, h, {1.0, 0.0});
      CHECK(k.radius == 0);
      CHECK(k.value(0) == std::complex<double>{1.0 / h, 0.0});
      CHECK(k.value(3) == std::complex<double>{0.0, 0.0});
    }
  }
  SUBCASE("center value matches the Bessel series") {
    // h w_0 = e^{-2z} I_0(2z) with z = t/h^2 for the heat coefficient
    for (double z : {0.1, 1.0, 10.0, 100.0}) {
      const Kernel1D k = kernel_1d(z, 1.0, {1.0, 0.0});
      const double expect = std::exp(-2.0 * z) * bessel_i0_2x(z);
      CHECK(std::abs(k.value(0).real() - expect) <= 1e-12 * expect);
      CHECK(k.value(0).imag() == 0.0);
    }
  }
  SUBCASE("unit mass across times and spacings") {
    for (double h : {1.0, 1.0 / 64}) {
      for (double zt : {0.1, 1.0, 10.0, 100.0}) {
        const Kernel1D k = kernel_1d(zt * h * h, h, {1.0, 0.0});
        CHECK(std::abs(k.mass() - std::complex<double>{1.0, 0.0}) <= 1e-12);
      }
    }
  }
  SUBCASE("heat entries are positive and even in j") {
    const Kernel1D k = kernel_1d(2.5, 1.0, {1.0, 0.0});
    REQUIRE(k.radius >= 3);
    for (int j = 0; j <= k.radius; ++j) {
      CHECK(k.value(j).real() > 0.0);
      CHECK(k.value(j) == k.value(-j));  // bitwise symmetry
    }
    CHECK(k.value(0).real() == k.max_abs());
  }
  SUBCASE("damped complex coefficient keeps |mass| <= 1") {
    const Kernel1D k = kernel_1d(1.5, 1.0, {1.0, 1.0});
    CHECK(std::abs(k.mass()) <= 1.0 + 1e-12);
    CHECK(std::abs(k.mass() - std::complex<double>{1.0, 0.0}) <= 1e-12);
  }
  SUBCASE("factorization crosscheck at z = 2") {
    // w_j = h sum_m K-_{m-j} K-_m with K-_j = (1/h) e^{-z} z^j / j!
    const double z = 2.0, h = 0.5;
    const Kernel1D k = kernel_1d(z * h * h, h, {1.0, 0.0});
    for (int j = -k.radius; j <= k.radius; ++j) {
      double sum = 0.0;
      for (int m = std::max(0, j); m < 200; ++m) {
        const double lg = -2.0 * z + (2 * m - j) * std::log(z) -
                          std::lgamma(m - j + 1.0) - std::lgamma(m + 1.0);
        sum += std::exp(lg);
      }
      sum /= h;
      CHECK(std::abs(k.value(j).real() - sum) <= 1e-13 * (1.0 + sum));
    }
  }
  SUBCASE("undamped coefficient is range limited") {
    CHECK_NOTHROW(kernel_1d(7.9, 1.0, {0.0, 1.0}));
    CHECK_THROWS_WITH(kernel_1d(8.1, 1.0, {0.0, 1.0}),
                      "kernel: undamped coefficient limited to t <= 8 h^2");
  }
  SUBCASE("semigroup property") {
    const double h = 0.25;
    const Kernel1D a = kernel_1d(0.3, h, {1.0, 0.0});
    const Kernel1D b = kernel_1d(0.7, h, {1.0, 0.0});
    const Kernel1D c = kernel_1d(1.0, h, {1.0, 0.0});
    for (int j = -c.radius; j <= c.radius; ++j) {
      std::complex<double> conv{0.0, 0.0};
      for (int m = -a.radius; m <= a.radius; ++m)
        conv += a.value(m) * b.value(j - m) * h;
      CHECK(std::abs(conv - c.value(j)) <= 1e-10 * c.max_abs());
    }
  }
  SUBCASE("L1 norm of the heat kernel is its mass") {
    const Kernel1D k = kernel_1d(3.0, 0.5, {1.0, 0.0});
    CHECK(kernel_lp_norm(k, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kernel_lp_norm(k, kInfinity) == k.max_abs());
    CHECK(kernel_grad_lp_norm(k, 1.0) > 0.0);
  }
}

TEST_CASE("kernel application") {
  const GridSpec g{32, 32, 1.0 / 32, Boundary::Periodic};
  SUBCASE("t = 0 leaves the field unchanged") {
    const ScalarField f = random_field(g, 41);
    const ScalarField out = apply_kernel(kernel_2d(0.0, g.h, {1.0, 0.0}), f);
    for (std::size_t i = 0; i < f.values.size(); ++i)
      CHECK(out.values[i] == f.values[i]);
  }
  SUBCASE("constant field is a fixed point up to the folded mass") {
    const ScalarField f(g, 2.5);
    const ScalarField out =
        apply_kernel(kernel_2d(0.01, g.h, {1.0, 0.0}), f);
    for (double v : out.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("matches a fine explicit Euler run on smooth data") {
    // low modes keep the Euler consistency error ~ e^{-s} s^2 / (2 M) per
    // axis mode; k = 1 on a 32^2 grid with M = 100 sits near 7e-6
    const ScalarField f = smooth_mode(g, 1, 1);
    const double t = 0.4 * g.h * g.h;
    const ScalarField exact = apply_kernel(kernel_2d(t, g.h, {1.0, 0.0}), f);
    ScalarField e = f;
    const int steps = 100;
    const double dt = t / steps;
    for (int i = 0; i < steps; ++i) {
      const ScalarField lap = laplacian_h(e);
      for (std::size_t j = 0; j < e.values.size(); ++j)
        e.values[j] += dt * lap.values[j];
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < e.values.size(); ++j)
      worst = std::max(worst, std::abs(e.values[j] - exact.values[j]));
    CHECK(worst <= 1e-5);
  }
  SUBCASE("evolution residual drops at second order in the sample spacing") {
    // residual of the integrated flow against a midpoint quadrature of
    // Lap_h u over [0, t]: halving the mesh should quarter it
    const GridSpec gc{8, 8, 1.0, Boundary::Periodic};
    const ScalarField f = random_field(gc, 43);
    const double t = 1.0;
    auto residual = [&](int n) {
      double worst = 0.0;
      ScalarField acc(gc);
      const double dt = t / n;
      for (int i = 0; i < n; ++i) {
        const double tm = (i + 0.5) * dt;
        const ScalarField mid =
            apply_kernel(kernel_2d(tm, gc.h, {1.0, 0.0}), f);
        const ScalarField lap = laplacian_h(mid);
        for (std::size_t j = 0; j < acc.values.size(); ++j)
          acc.values[j] += dt * lap.values[j];
      }
      const ScalarField end =
          apply_kernel(kernel_2d(t, gc.h, {1.0, 0.0}), f);
      for (std::size_t j = 0; j < acc.values.size(); ++j)
        worst = std::max(worst,
                         std::abs(end.values[j] - f.values[j] - acc.values[j]));
      return worst;
    };
    const double r1 = residual(5);
    const double r2 = residual(10);
    REQUIRE(r2 > 1e-14);
    CHECK(r1 / r2 >= 3.3);
    CHECK(r1 / r2 <= 4.7);
  }
}

TEST_CASE("duhamel solve") {
  const GridSpec g{16, 16, 1.0 / 16, Boundary::Periodic};
  const std::vector<double> times{0.0, 0.001, 0.002, 0.003, 0.004};
  std::vector<ScalarField> zero(times.size(), ScalarField(g));
  SUBCASE("zero forcing reduces to the kernel") {
    const ScalarField f = random_field(g, 47);
    const ScalarField a = duhamel_solve(f, zero, {1.0, 0.0}, times);
    const ScalarField b =
        apply_kernel(kernel_2d(times.back(), g.h, {1.0, 0.0}), f);
    for (std::size_t i = 0; i < a.values.size(); ++i)
      CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
  }
  SUBCASE("linear in the forcing") {
    const ScalarField f(g);
    std::vector<ScalarField> f1, f2, fsum;
    for (std::size_t i = 0; i < times.size(); ++i) {
      f1.push_back(random_field(g, 100 + i));
      f2.push_back(random_field(g, 200 + i));
      ScalarField s = f1.back();
      for (std::size_t j = 0; j < s.values.size(); ++j)
        s.values[j] += f2.back().values[j];
      fsum.push_back(s);
    }
    const ScalarField a = duhamel_solve(f, f1, {1.0, 0.0}, times);
    const ScalarField b = duhamel_solve(f, f2, {1.0, 0.0}, times);
    const ScalarField c = duhamel_solve(f, fsum, {1.0, 0.0}, times);
    for (std::size_t i = 0; i < c.values.size(); ++i)
      CHECK(c.values[i] ==
            doctest::Approx(a.values[i] + b.values[i]).epsilon(1e-11));
  }
  SUBCASE("constant forcing matches a fine Euler run") {
    const ScalarField f = smooth_mode(g, 1, 1);
    const ScalarField force(g, 1.0);
    std::vector<ScalarField> forcing(times.size(), force);
    const ScalarField a = duhamel_solve(f, forcing, {1.0, 0.0}, times);
    ScalarField e = f;
    const int steps = 4000;
    const double dt = times.back() / steps;
    for (int i = 0; i < steps; ++i) {
      const ScalarField lap = laplacian_h(e);
      for (std::size_t j = 0; j < e.values.size(); ++j)
        e.values[j] += dt * (lap.values[j] + 1.0);
    }
    for (std::size_t i = 0; i < a.values.size(); ++i)
      CHECK(a.values[i] == doctest::Approx(e.values[i]).epsilon(1e-4));
  }
  SUBCASE("mesh validation") {
    const ScalarField f(g);
    CHECK_THROWS_AS(
        duhamel_solve(f, zero, {1.0, 0.0}, {0.0, 0.001, 0.003, 0.004, 0.005}),
        std::invalid_argument);
    CHECK_THROWS_AS(duhamel_solve(f, zero, {1.0, 0.0}, {0.1, 0.2}),
                    std::invalid_argument);
    std::vector<ScalarField> short_forcing(2, ScalarField(g));
    CHECK_THROWS_AS(duhamel_solve(f, short_forcing, {1.0, 0.0}, times),
                    std::invalid_argument);
  }
}

TEST_CASE("decay-rate measurement") {
  SUBCASE("p = q gives a flat slope that passes") {
    const EstimateReport r =
        verify_lplq({1.0, 0.0}, 1.0, 2.0, 2.0, 0, 10.0, 1e4, 12);
    CHECK(r.target == 0.0);
    CHECK(std::abs(r.slope) <= 0.05);
    CHECK(r.pass());
    CHECK(r.times.size() == 12);
    CHECK(r.norms.size() == 12);
  }
  SUBCASE("smoothing slope for L1 -> Linf") {
    const EstimateReport r =
        verify_lplq({1.0, 0.0}, 1.0, kInfinity, 1.0, 0, 10.0, 1e4, 12);
    CHECK(r.target == doctest::Approx(-1.0));
    CHECK(std::abs(r.slope - r.target) <= r.tolerance);
    CHECK(r.pass());
  }
  SUBCASE("derivative order steepens the target by 1/2") {
    const EstimateReport r =
        verify_lplq({1.0, 1.0}, 1.0, 2.0, 2.0, 1, 10.0, 1e4, 10);
    CHECK(r.target == doctest::Approx(-0.5));
    CHECK(r.pass());
  }
  SUBCASE("argument validation") {
    CHECK_THROWS_AS(verify_lplq({0.0, 1.0}, 1.0, 2.0, 2.0, 0, 1.0, 10.0, 12),
                    std::invalid_argument);  // needs Re(coeff) > 0
    CHECK_THROWS_AS(verify_lplq({1.0, 0.0}, 1.0, 1.0, 2.0, 0, 1.0, 10.0, 12),
                    std::invalid_argument);  // needs q <= p
    CHECK_THROWS_AS(verify_lplq({1.0, 0.0}, 1.0, 2.0, 0.5, 0, 1.0, 10.0, 12),
                    std::invalid_argument);  // norms need r >= 1
    CHECK_THROWS_AS(verify_lplq({1.0, 0.0}, 1.0, 2.0, 2.0, 0, 1.0, 10.0, 5),
                    std::invalid_argument);  // too few samples
    CHECK_THROWS_AS(verify_lplq({1.0, 0.0}, 1.0, 2.0, 2.0, 0, 10.0, 10.5, 12),
                    std::invalid_argument);  // range too short
    CHECK_THROWS_AS(verify_lplq({1.0, 0.0}, 1.0, 2.0, 2.0, 2, 1.0, 10.0, 12),
                    std::invalid_argument);  // derivative order 0 or 1
  }
}
