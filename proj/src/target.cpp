#include "llg/target.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <stdexcept>

#include "llg/rng.hpp"

namespace llg {

double Hypersurface::frame_bound() const {
  throw std::logic_error(name() +
                         ": no global frame; use parallel transport (frames "
                         "module) to build one");
}

void Hypersurface::require_on_surface(const Vec3& x, const char* who) const {
  if (!x.finite())
    throw std::invalid_argument(std::string(who) + ": non-finite point");
  if (off_surface_distance(x) > 10.0 * tol)
    throw std::invalid_argument(std::string(who) +
                                ": point off the target surface");
}

// ---------------------------------------------------------------------------
// Unit sphere

Vec3 UnitSphere::normal(const Vec3& u) const {
  const double n2 = u.norm2();
  if (!(n2 > 0.0) || !std::isfinite(n2))
    throw std::invalid_argument("sphere normal: degenerate point");
  return u / std::sqrt(n2);
}

Vec3 UnitSphere::closest_point(const Vec3& x) const {
  const double n = x.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::domain_error("sphere closest_point: undefined at the origin");
  return x / n;
}

// ---------------------------------------------------------------------------
// Axis-aligned ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1

namespace {

/// Max ratio |(u'-u).nu(u)| / |u'-u|^2 over sampled nearby on-surface pairs.
/// Used to fit the quadratic graph constant for surfaces where it has no
/// closed form; caller applies the safety margin.
double fit_quad_constant(const Hypersurface& s, const Vec3& probe_scale,
                         double radius, int samples) {
  Rng rng(0x51CA7E5Dull);
  double worst = 0.0;
  int accepted = 0;
  while (accepted < samples) {
    const Vec3 dir{rng.symmetric(), rng.symmetric(), rng.symmetric()};
    if (dir.norm2() < 1e-4 || dir.norm2() > 1.0) continue;
    Vec3 u;
    try {
      u = s.closest_point(Vec3{probe_scale.x * dir.x, probe_scale.y * dir.y,
                               probe_scale.z * dir.z});
    } catch (const std::exception&) {
      continue;
    }
    const Vec3 step{rng.symmetric(), rng.symmetric(), rng.symmetric()};
    if (step.norm2() < 1e-6) continue;
    const double rho = rng.uniform(1e-3, 1.0) * radius;
    Vec3 up;
    try {
      up = s.closest_point(u + step.normalized() * rho);
    } catch (const std::exception&) {
      continue;
    }
    const double gap2 = (up - u).norm2();
    if (gap2 < 1e-12 || gap2 > radius * radius) continue;
    const double num = std::abs((up - u).dot(s.normal(u)));
    worst = std::max(worst, num / gap2);
    ++accepted;
  }
  return worst;
}

}  // namespace

Ellipsoid::Ellipsoid(double a, double b, double c) : a_(a), b_(b), c_(c) {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
    throw std::invalid_argument("ellipsoid: semi-axes must be > 0");
  const double amax = std::max({a, b, c});
  const double amin = std::min({a, b, c});
  // Largest principal curvature of the ellipsoid is amax/amin^2.
  c_nu_ = amax / (amin * amin);
  tube_radius_ = amin * amin / amax;  // lower bound on the reach
  quad_radius_ = 0.5 / c_nu_;
  quad_constant_ =
      1.2 * fit_quad_constant(*this, Vec3{a, b, c}, quad_radius_, 40000);
}

std::string Ellipsoid::name() const {
  return "ellipsoid:" + std::to_string(a_) + "," + std::to_string(b_) + "," +
         std::to_string(c_);
}

double Ellipsoid::implicit(const Vec3& x) const {
  return x.x * x.x / (a_ * a_) + x.y * x.y / (b_ * b_) + x.z * x.z / (c_ * c_) -
         1.0;
}

Vec3 Ellipsoid::normal(const Vec3& u) const {
  const Vec3 g{u.x / (a_ * a_), u.y / (b_ * b_), u.z / (c_ * c_)};
  const double n = g.norm();
  if (!(n > 0.0)) throw std::invalid_argument("ellipsoid normal: degenerate");
  return g / n;
}

Vec3 Ellipsoid::anchor_point() const {
  const double theta = 0.9, phi = 0.35;
  return Vec3{a_ * std::sin(theta) * std::cos(phi),
              b_ * std::sin(theta) * std::sin(phi), c_ * std::cos(theta)};
}

Vec3 Ellipsoid::closest_point(const Vec3& x) const {
  if (!x.finite())
    throw std::invalid_argument("ellipsoid closest_point: non-finite input");
  // Nearest point has the form p_i = x_i * s_i^2 / (s_i^2 + t) for the
  // Lagrange multiplier t solving g(t) = sum x_i^2 s_i^2/(s_i^2+t)^2 - 1 = 0.
  // g is strictly decreasing on (-min s_i^2, inf), so Newton with a bisection
  // safeguard converges from the scaled-input seed.
  const double s2[3] = {a_ * a_, b_ * b_, c_ * c_};
  const double xi[3] = {x.x, x.y, x.z};
  const double scaled = std::sqrt(std::max(implicit(x) + 1.0, 0.0));
  const double smin2 = std::min({s2[0], s2[1], s2[2]});
  double t = smin2 * (scaled - 1.0);  // exact for the sphere case
  double lo = -0.999 * smin2;
  double hi = std::max(1.0, std::abs(t)) * 4.0 + smin2;
  auto g = [&](double tt) {
    double v = -1.0;
    for (int i = 0; i < 3; ++i) {
      const double d = s2[i] + tt;
      v += xi[i] * xi[i] * s2[i] / (d * d);
    }
    return v;
  };
  while (g(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e12)
      throw std::domain_error("ellipsoid closest_point: no bracket");
  }
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    const double gv = g(t);
    if (std::abs(gv) < 1e-14) {
      converged = true;
      break;
    }
    if (gv > 0.0)
      lo = t;
    else
      hi = t;
    double dg = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double d = s2[i] + t;
      dg += -2.0 * xi[i] * xi[i] * s2[i] / (d * d * d);
    }
    double next = t - gv / dg;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  if (!converged)
    throw std::runtime_error(
        "ellipsoid closest_point: Newton failed to converge");
  const Vec3 p{xi[0] * s2[0] / (s2[0] + t), xi[1] * s2[1] / (s2[1] + t),
               xi[2] * s2[2] / (s2[2] + t)};
  if ((x - p).norm() > tube_radius_)
    throw std::domain_error(
        "ellipsoid closest_point: input outside tubular neighborhood");
  return p;
}

// ---------------------------------------------------------------------------
// Torus of revolution about the z axis

Torus::Torus(double major, double minor) : major_(major), minor_(minor) {
  if (!(minor > 0.0) || !(major > minor))
    throw std::invalid_argument("torus: need R > r > 0");
  c_nu_ = std::max(1.0 / minor, 1.0 / (major - minor));
  c_e_ = 1.0 / (major - minor);
  tube_radius_ = std::min(minor, major - minor);
  quad_radius_ = 0.5 / c_nu_;
  quad_constant_ =
      1.2 * fit_quad_constant(
                *this, Vec3{major + minor, major + minor, 2.0 * minor},
                quad_radius_, 40000);
}

std::string Torus::name() const {
  return "torus:" + std::to_string(major_) + "," + std::to_string(minor_);
}

Vec3 Torus::closest_point(const Vec3& x) const {
  if (!x.finite())
    throw std::invalid_argument("torus closest_point: non-finite input");
  const double rho = std::hypot(x.x, x.y);
  if (rho < 1e-12)
    throw std::domain_error("torus closest_point: input on the axis");
  // Project to the core circle, then move distance r toward the input.
  const Vec3 core{major_ * x.x / rho, major_ * x.y / rho, 0.0};
  const Vec3 d = x - core;
  const double dn = d.norm();
  if (dn < 1e-12)
    throw std::domain_error("torus closest_point: input on the core circle");
  if ((dn > minor_ ? dn - minor_ : minor_ - dn) > tube_radius_)
    throw std::domain_error(
        "torus closest_point: input outside tubular neighborhood");
  return core + d * (minor_ / dn);
}

Vec3 Torus::normal(const Vec3& u) const {
  const double rho = std::hypot(u.x, u.y);
  if (rho < 1e-12) throw std::invalid_argument("torus normal: degenerate");
  const Vec3 core{major_ * u.x / rho, major_ * u.y / rho, 0.0};
  const Vec3 d = u - core;
  const double dn = d.norm();
  if (dn < 1e-12) throw std::invalid_argument("torus normal: degenerate");
  return d / dn;
}

Vec3 Torus::anchor_point() const {
  const double phi = 0.35, theta = 0.6;
  const double ring = major_ + minor_ * std::cos(theta);
  return Vec3{ring * std::cos(phi), ring * std::sin(phi),
              minor_ * std::sin(theta)};
}

std::optional<std::pair<Vec3, Vec3>> Torus::global_frame(const Vec3& u) const {
  const double rho = std::hypot(u.x, u.y);
  if (rho < 1e-12)
    throw std::invalid_argument("torus global_frame: degenerate point");
  // e1: unit vector along increasing major angle; e2 = nu ^ e1.
  const Vec3 e1{-u.y / rho, u.x / rho, 0.0};
  const Vec3 e2 = normal(u).cross(e1);
  return std::make_pair(e1, e2);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> parse_params(const std::string& text, std::size_t count,
                                 const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    double v = 0.0;
    const auto res = std::from_chars(text.data() + pos, text.data() + comma, v);
    if (res.ec != std::errc{} || res.ptr != text.data() + comma)
      throw std::invalid_argument("target: bad number in \"" + what + "\"");
    out.push_back(v);
    if (comma == text.size()) break;
    pos = comma + 1;
  }
  if (out.size() != count)
    throw std::invalid_argument("target: \"" + what + "\" expects " +
                                std::to_string(count) + " parameters");
  return out;
}

}  // namespace

std::shared_ptr<const Hypersurface> make_surface(const std::string& config) {
  if (config == "sphere") return std::make_shared<UnitSphere>();
  const std::string ell = "ellipsoid:";
  const std::string tor = "torus:";
  if (config.rfind(ell, 0) == 0) {
    const auto p = parse_params(config.substr(ell.size()), 3, config);
    return std::make_shared<Ellipsoid>(p[0], p[1], p[2]);
  }
  if (config.rfind(tor, 0) == 0) {
    const auto p = parse_params(config.substr(tor.size()), 2, config);
    return std::make_shared<Torus>(p[0], p[1]);
  }
  throw std::invalid_argument("target: unknown surface \"" + config +
                              "\" (want sphere | ellipsoid:a,b,c | torus:R,r)");
}

}  // namespace llg
