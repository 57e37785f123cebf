#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "llg/vec3.hpp"

namespace llg {

/// Compact smooth hypersurface N in R^3: outward unit normal, tangent
/// projection, nearest-point retraction, and the constants the estimates
/// need. Implementations are immutable and shareable between threads.
class Hypersurface {
 public:
  /// On-surface tolerance for SurfacePoint-style guarantees.
  static constexpr double tol = 1e-10;

  virtual ~Hypersurface() = default;

  virtual std::string name() const = 0;

  /// Outward unit normal at a point on N (within 10*tol).
  virtual Vec3 normal(const Vec3& u) const = 0;

  /// Nearest point on N. Throws if x is outside the tubular neighborhood or
  /// the iteration fails to converge.
  virtual Vec3 closest_point(const Vec3& x) const = 0;

  /// c_nu >= sup |grad nu| over N.
  virtual double curvature_bound() const = 0;

  virtual bool has_global_frame() const = 0;

  /// Smooth orthonormal tangent pair (e1, e2) with e2 = nu ^ e1, when one
  /// exists globally. Genus-0 targets return nullopt (hairy ball); build a
  /// frame by parallel transport instead (frames module).
  virtual std::optional<std::pair<Vec3, Vec3>> global_frame(
      const Vec3& u) const {
    (void)u;
    return std::nullopt;
  }

  /// c_e >= sup |grad e1| for the global frame; throws when there is none.
  virtual double frame_bound() const;

  /// Quadratic graph bound: |(u' - u) . normal(u)| <= quad_constant * |u'-u|^2
  /// for on-surface pairs with |u' - u| < quad_radius.
  virtual double quad_radius() const = 0;
  virtual double quad_constant() const = 0;

  /// Radius of the tubular neighborhood on which closest_point is defined.
  virtual double tube_radius() const = 0;

  /// A fixed on-surface point away from coordinate symmetries; base point
  /// for generated data.
  virtual Vec3 anchor_point() const {
    return closest_point(Vec3{0.3, -0.2, 1.1});
  }

  Vec3 tangent_project(const Vec3& u, const Vec3& v) const {
    const Vec3 n = normal(u);
    return v - n * v.dot(n);
  }

  double off_surface_distance(const Vec3& x) const {
    return (x - closest_point(x)).norm();
  }

  /// Throws when x is further than 10*tol from N.
  void require_on_surface(const Vec3& x, const char* who) const;
};

class UnitSphere final : public Hypersurface {
 public:
  std::string name() const override { return "sphere"; }
  Vec3 normal(const Vec3& u) const override;
  Vec3 closest_point(const Vec3& x) const override;
  double curvature_bound() const override { return 1.0; }
  bool has_global_frame() const override { return false; }
  double quad_radius() const override { return 1.0; }
  double quad_constant() const override { return 0.5; }
  double tube_radius() const override { return 1.0; }
};

class Ellipsoid final : public Hypersurface {
 public:
  Ellipsoid(double a, double b, double c);
  std::string name() const override;
  Vec3 normal(const Vec3& u) const override;
  Vec3 closest_point(const Vec3& x) const override;
  double curvature_bound() const override { return c_nu_; }
  bool has_global_frame() const override { return false; }
  double quad_radius() const override { return quad_radius_; }
  double quad_constant() const override { return quad_constant_; }
  double tube_radius() const override { return tube_radius_; }
  Vec3 anchor_point() const override;

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }

 private:
  double implicit(const Vec3& x) const;
  double a_, b_, c_;
  double c_nu_, tube_radius_, quad_radius_, quad_constant_;
};

class Torus final : public Hypersurface {
 public:
  Torus(double major, double minor);
  std::string name() const override;
  Vec3 normal(const Vec3& u) const override;
  Vec3 closest_point(const Vec3& x) const override;
  double curvature_bound() const override { return c_nu_; }
  bool has_global_frame() const override { return true; }
  std::optional<std::pair<Vec3, Vec3>> global_frame(
      const Vec3& u) const override;
  double frame_bound() const override { return c_e_; }
  double quad_radius() const override { return quad_radius_; }
  double quad_constant() const override { return quad_constant_; }
  double tube_radius() const override { return tube_radius_; }
  Vec3 anchor_point() const override;

  double major() const { return major_; }
  double minor() const { return minor_; }

 private:
  double major_, minor_;
  double c_nu_, c_e_, tube_radius_, quad_radius_, quad_constant_;
};

/// Surface from a config string: "sphere", "ellipsoid:a,b,c", "torus:R,r".
std::shared_ptr<const Hypersurface> make_surface(const std::string& config);

}  // namespace llg
