#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "llg/grid.hpp"
#include "llg/rng.hpp"

using namespace llg;

namespace {

GridSpec periodic(int n, double h = 1.0) {
  return GridSpec{n, n, h, Boundary::Periodic};
}

ScalarField random_scalar(const GridSpec& g, Rng& rng) {
  ScalarField f(g);
  for (double& v : f.values) v = rng.symmetric();
  return f;
}

VectorField random_vector(const GridSpec& g, Rng& rng) {
  VectorField f(g);
  for (Vec3& v : f.values)
    v = Vec3{rng.symmetric(), rng.symmetric(), rng.symmetric()};
  return f;
}

/// Mean-zero trigonometric polynomial sampled on the grid (no constant mode,
/// so periodic Poincare-type inequalities apply).
ScalarField smooth_scalar(const GridSpec& g, Rng& rng, int kmax) {
  ScalarField f(g);
  struct Mode {
    int kx, ky;
    double amp, phase_x, phase_y;
  };
  std::vector<Mode> modes;
  for (int kx = 0; kx <= kmax; ++kx)
    for (int ky = 0; ky <= kmax; ++ky) {
      if (kx == 0 && ky == 0) continue;
      modes.push_back({kx, ky, rng.symmetric() / (kx * kx + ky * ky),
                       rng.uniform(0.0, 6.283185307179586),
                       rng.uniform(0.0, 6.283185307179586)});
    }
  const double two_pi = 6.283185307179586;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const double x = static_cast<double>(ix) / g.nx;
      const double y = static_cast<double>(iy) / g.ny;
      double v = 0.0;
      for (const Mode& m : modes)
        v += m.amp * std::cos(two_pi * m.kx * x + m.phase_x) *
             std::cos(two_pi * m.ky * y + m.phase_y);
      f.node(ix, iy) = v;
    }
  return f;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("differences of constant fields vanish") {
  const GridSpec g = periodic(8, 0.25);
  ScalarField c(g, 3.25);
  for (Axis ax : {Axis::X1, Axis::X2})
    for (DiffKind k : {DiffKind::Forward, DiffKind::Backward,
                       DiffKind::Centered}) {
      const ScalarField d = diff(c, ax, k);
      for (double v : d.values) CHECK(v == 0.0);
    }
}

TEST_CASE("forward difference of an affine field is exact") {
  GridSpec g{8, 8, 0.5, Boundary::ConstantFarField};
  ScalarField u(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) u.node(ix, iy) = g.x(ix);
  const ScalarField d1 = diff(u, Axis::X1, DiffKind::Forward);
  const ScalarField d2 = diff(u, Axis::X2, DiffKind::Forward);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix + 1 < g.nx; ++ix) {
      CHECK(d1.node(ix, iy) == doctest::Approx(1.0).epsilon(1e-15));
      if (iy + 1 < g.ny) CHECK(d2.node(ix, iy) == 0.0);
    }
}

TEST_CASE("centered difference is the mean of the one-sided ones") {
  const GridSpec g = periodic(16, 0.125);
  Rng rng(7);
  const ScalarField u = random_scalar(g, rng);
  for (Axis ax : {Axis::X1, Axis::X2}) {
    const ScalarField fd = diff(u, ax, DiffKind::Forward);
    const ScalarField bd = diff(u, ax, DiffKind::Backward);
    const ScalarField cd = diff(u, ax, DiffKind::Centered);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
      worst = std::max(worst, std::abs(cd.values[i] -
                                       0.5 * (fd.values[i] + bd.values[i])));
    CHECK(worst <= 1e-13 * (1.0 + lp_norm(cd, kInfinity)));
  }
}

TEST_CASE("five-point laplacian: exact cases and composed form") {
  SUBCASE("constant field") {
    const ScalarField lap = laplacian_h(ScalarField(periodic(8), -2.0));
    for (double v : lap.values) CHECK(v == 0.0);
  }
  SUBCASE("quadratic in x1 gives exactly 2 at interior nodes") {
    GridSpec g{10, 10, 0.3, Boundary::ConstantFarField};
    ScalarField u(g);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) u.node(ix, iy) = g.x(ix) * g.x(ix);
    const ScalarField lap = laplacian_h(u);
    for (int iy = 1; iy + 1 < g.ny; ++iy)
      for (int ix = 1; ix + 1 < g.nx; ++ix)
        CHECK(lap.node(ix, iy) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("equals the per-axis second differences") {
    const GridSpec g = periodic(16, 0.2);
    Rng rng(11);
    const ScalarField u = random_scalar(g, rng);
    const ScalarField lap = laplacian_h(u);
    ScalarField composed(g);
    const ScalarField dxx =
        diff(diff(u, Axis::X1, DiffKind::Forward), Axis::X1,
             DiffKind::Backward);
    const ScalarField dyy =
        diff(diff(u, Axis::X2, DiffKind::Forward), Axis::X2,
             DiffKind::Backward);
    for (std::size_t i = 0; i < u.values.size(); ++i)
      composed.values[i] = dxx.values[i] + dyy.values[i];
    CHECK(max_abs_diff(lap, composed) <=
          1e-13 * (1.0 + lp_norm(lap, kInfinity)));
  }
}

TEST_CASE("weighted lattice norms") {
  const GridSpec g = periodic(8, 0.25);
  SUBCASE("zero field") {
    const ScalarField z(g);
    for (double p : {1.0, 2.0, 4.0, kInfinity}) CHECK(lp_norm(z, p) == 0.0);
  }
  SUBCASE("scaled one-hot: the delta/h^2 normalization") {
    ScalarField d(g);
    d.node(3, 5) = 1.0 / (g.h * g.h);
    CHECK(lp_norm(d, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    // L^2_h picks up h^{-d/2}, not 1; the L^1_h norm is the one equal to 1.
    CHECK(lp_norm(d, 2.0) == doctest::Approx(1.0 / g.h).epsilon(1e-14));
    CHECK(lp_norm(d, kInfinity) ==
          doctest::Approx(1.0 / (g.h * g.h)).epsilon(1e-14));
  }
  SUBCASE("Holder inequality on random fields") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const ScalarField u = random_scalar(g, rng);
      const ScalarField v = random_scalar(g, rng);
      ScalarField uv(g);
      for (std::size_t i = 0; i < u.values.size(); ++i)
        uv.values[i] = u.values[i] * v.values[i];
      CHECK(lp_norm(uv, 1.0) <=
            lp_norm(u, 2.0) * lp_norm(v, 2.0) * (1.0 + 1e-14));
    }
  }
  SUBCASE("p below 1 is rejected") {
    CHECK_THROWS_WITH(lp_norm(ScalarField(g), 0.5),
                      "lp_norm: p must be >= 1");
  }
}

TEST_CASE("inner product and summation by parts") {
  const GridSpec g = periodic(16, 0.125);
  Rng rng(5);
  SUBCASE("(u, u) equals the squared L2 norm") {
    const VectorField u = random_vector(g, rng);
    const double n = lp_norm(u, 2.0);
    CHECK(inner_l2h(u, u) == doctest::Approx(n * n).epsilon(1e-13));
  }
  SUBCASE("index-shifted sign flip, both axes") {
    for (int trial = 0; trial < 10; ++trial) {
      const ScalarField u = random_scalar(g, rng);
      const ScalarField v = random_scalar(g, rng);
      for (Axis ax : {Axis::X1, Axis::X2}) {
        const double lhs = inner_l2h(u, diff(v, ax, DiffKind::Forward));
        const double rhs = -inner_l2h(diff(u, ax, DiffKind::Backward), v);
        const double scale = lp_norm(u, 2.0) *
                             lp_norm(diff(v, ax, DiffKind::Forward), 2.0);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * (1.0 + scale));
      }
    }
  }
  SUBCASE("disjoint one-hot fields are orthogonal") {
    ScalarField a(g), b(g);
    a.node(1, 2) = 4.0;
    b.node(9, 12) = -3.0;
    CHECK(inner_l2h(a, b) == 0.0);
  }
  SUBCASE("incompatible grids are rejected") {
    CHECK_THROWS_WITH(
        inner_l2h(ScalarField(periodic(8)), ScalarField(periodic(16))),
        "inner_l2h: incompatible grids");
  }
}

TEST_CASE("product rule for the forward difference") {
  const GridSpec g = periodic(12, 0.4);
  Rng rng(13);
  const ScalarField u = random_scalar(g, rng);
  const ScalarField v = random_scalar(g, rng);
  ScalarField uv(g);
  for (std::size_t i = 0; i < u.values.size(); ++i)
    uv.values[i] = u.values[i] * v.values[i];
  for (Axis ax : {Axis::X1, Axis::X2}) {
    const int dx = ax == Axis::X1 ? 1 : 0;
    const int dy = ax == Axis::X2 ? 1 : 0;
    const ScalarField lhs = diff(uv, ax, DiffKind::Forward);
    const ScalarField du = diff(u, ax, DiffKind::Forward);
    const ScalarField dv = diff(v, ax, DiffKind::Forward);
    double worst = 0.0;
    double scale = 0.0;
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double r = u.node(ix, iy) * dv.node(ix, iy) +
                         v.at(ix + dx, iy + dy) * du.node(ix, iy);
        worst = std::max(worst, std::abs(lhs.node(ix, iy) - r));
        scale = std::max(scale, std::abs(r));
      }
    CHECK(worst <= 1e-13 * (1.0 + scale));
  }
}

TEST_CASE("laplacian symmetry and difference commutation") {
  const GridSpec g = periodic(16, 0.35);
  Rng rng(17);
  SUBCASE("(lap u, v) = (u, lap v) on periodic grids") {
    for (int trial = 0; trial < 10; ++trial) {
      const ScalarField u = random_scalar(g, rng);
      const ScalarField v = random_scalar(g, rng);
      const double a = inner_l2h(laplacian_h(u), v);
      const double b = inner_l2h(u, laplacian_h(v));
      CHECK(std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a) + std::abs(b)));
    }
  }
  SUBCASE("forward and backward differences commute exactly") {
    const ScalarField u = random_scalar(g, rng);
    CHECK(max_abs_diff(
              diff(diff(u, Axis::X1, DiffKind::Forward), Axis::X1,
                   DiffKind::Backward),
              diff(diff(u, Axis::X1, DiffKind::Backward), Axis::X1,
                   DiffKind::Forward)) == 0.0);
    // mixed axes commute algebraically; rounding differs by op order
    CHECK(max_abs_diff(
              diff(diff(u, Axis::X1, DiffKind::Forward), Axis::X2,
                   DiffKind::Forward),
              diff(diff(u, Axis::X2, DiffKind::Forward), Axis::X1,
                   DiffKind::Forward)) <= 1e-13 / (g.h * g.h));
  }
}

TEST_CASE("sobolev norms") {
  const GridSpec g = periodic(12, 0.2);
  Rng rng(19);
  const ScalarField u = random_scalar(g, rng);
  SUBCASE("constant field has zero homogeneous H1 seminorm") {
    CHECK(sobolev_norm(ScalarField(g, 5.0), 1, 2.0, true) == 0.0);
  }
  SUBCASE("k = 0 reduces to the Lp norm") {
    for (double p : {1.0, 2.0, kInfinity})
      CHECK(sobolev_norm(u, 0, p) == lp_norm(u, p));
  }
  SUBCASE("norm grows with k") {
    CHECK(sobolev_norm(u, 1, 2.0) >= lp_norm(u, 2.0));
    CHECK(sobolev_norm(u, 2, 2.0) >= sobolev_norm(u, 1, 2.0));
  }
  SUBCASE("k above 2 is rejected") {
    CHECK_THROWS_WITH(sobolev_norm(u, 3, 2.0),
                      "sobolev_norm: k > 2 unsupported");
  }
  SUBCASE("multi-index enumeration sizes") {
    CHECK(multi_indices(1, true).size() == 4);
    CHECK(multi_indices(2, true).size() == 10);
    CHECK(multi_indices(2, false).size() == 15);
    CHECK(multi_indices(0, false).size() == 1);
    for (const MultiIndex& a : multi_indices(2, true)) CHECK(a.order() == 2);
  }
}

TEST_CASE("interpolation inequality with one fitted constant") {
  // || u ||_4^2 <= C || u ||_2 || D1 u ||_2 on mean-zero periodic fields;
  // one constant fitted as the max ratio must cover every sample and stay
  // of order one.
  Rng rng(23);
  double fitted = 0.0;
  for (int n : {16, 32}) {
    const GridSpec g = periodic(n, 1.0 / n);
    for (int trial = 0; trial < 100; ++trial) {
      const ScalarField u = smooth_scalar(g, rng, 3);
      const double lhs = std::pow(lp_norm(u, 4.0), 2.0);
      const double rhs = lp_norm(u, 2.0) * sobolev_norm(u, 1, 2.0, true);
      REQUIRE(rhs > 0.0);
      fitted = std::max(fitted, lhs / rhs);
    }
  }
  CHECK(fitted > 0.0);
  CHECK(fitted < 2.0);
}

TEST_CASE("grid spec validation and boundary handling") {
  SUBCASE("invalid specs are rejected with the field name") {
    CHECK_THROWS_WITH((GridSpec{8, 8, 0.0, Boundary::Periodic}.validate()),
                      "grid.h must be > 0");
    CHECK_THROWS_WITH((GridSpec{3, 8, 1.0, Boundary::Periodic}.validate()),
                      "grid.nx must be >= 4");
    CHECK_THROWS_WITH((GridSpec{8, 2, 1.0, Boundary::Periodic}.validate()),
                      "grid.ny must be >= 4");
  }
  SUBCASE("periodic wrap and far-field ghost values") {
    GridSpec gp = periodic(4, 1.0);
    ScalarField up(gp);
    up.node(0, 0) = 7.0;
    CHECK(up.at(4, 0) == 7.0);
    CHECK(up.at(-4, -4) == 7.0);
    GridSpec gf{4, 4, 1.0, Boundary::ConstantFarField};
    ScalarField uf(gf, 0.0, /*far=*/2.5);
    uf.far_value = 2.5;
    CHECK(uf.at(-1, 0) == 2.5);
    CHECK(uf.at(0, 4) == 2.5);
  }
  SUBCASE("minimum-image distance wraps on periodic grids") {
    const GridSpec g = periodic(8, 1.0);
    CHECK(g.min_image(7.0, 8.0) == doctest::Approx(-1.0));
    CHECK(g.min_image(-5.0, 8.0) == doctest::Approx(3.0));
    GridSpec gf{8, 8, 1.0, Boundary::ConstantFarField};
    CHECK(gf.min_image(7.0, 8.0) == 7.0);
  }
}
