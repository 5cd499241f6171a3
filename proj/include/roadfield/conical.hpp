#pragma once

#include <optional>
#include <vector>

#include "roadfield/front_geometry.hpp"

namespace roadfield {

/// Sector Omega_a = {r (sin theta, cos theta) : theta in (pi/2 - 2a, pi/2)}
/// bounded by the road Gamma_0 (positive x-axis) and the road Gamma_a (polar
/// angle 2a from the x-axis). a = pi/2 is the half-plane.
class ConeGeometry {
 public:
  explicit ConeGeometry(double a);

  [[nodiscard]] double a() const { return a_; }
  /// Reflection across the bisector (polar angle a); swaps Gamma_0 and Gamma_a.
  [[nodiscard]] Point2 reflect(double x, double y) const;
  /// Closure of Omega_a, with a small angular tolerance.
  [[nodiscard]] bool contains(double x, double y) const;
  /// Direction (angle from the y-axis) of Gamma_a: pi/2 - 2a.
  [[nodiscard]] double far_road_theta() const;
  [[nodiscard]] double bisector_theta() const;

 private:
  double a_;
  double c2_;
  double s2_;
};

Point2 reflect(double a, double x, double y);

/// min{J(t, x, y), J(t, reflect(x, y))}: the equal-diffusivity cone value
/// function. Rejects points outside the cone and parameters carrying D_tilde.
double solve_Ja(double t, double x, double y, const ConeGeometry& cone, const ModelParams& params);

/// c_{*a}(theta) for theta in [pi/2 - 2a, pi/2].
double cone_speed(double theta, const ConeGeometry& cone, const FrontGeometry& geometry);
double cone_speed(double theta, const ConeGeometry& cone, const ModelParams& params);

struct ConeSample {
  double theta;
  double speed;
  int branch;  ///< 0 = nearer Gamma_0, 1 = nearer Gamma_a
  [[nodiscard]] double x() const;
  [[nodiscard]] double y() const;
};

struct ConeWulffShape {
  ModelParams params;
  double a = 0.0;
  std::vector<ConeSample> samples;  ///< theta ascending over [pi/2 - 2a, pi/2]
  double theta_star = 0.0;
  double road_speed = 0.0;
  /// Decision: a >= pi/2 - theta_star.
  bool convex = false;
  /// Cross-check: every sample lies on the bisector side of the tangent line
  /// through the bisector boundary point.
  bool supporting_line_convex = false;
  /// Whether the two tests agree.
  [[nodiscard]] bool consistent() const { return convex == supporting_line_convex; }
};

ConeWulffShape cone_wulff(const ConeGeometry& cone, const ModelParams& params, int n);

/// Convexity by the angle criterion alone (cheap: needs only theta_*).
bool cone_convex(const ConeGeometry& cone, const ModelParams& params);

/// Bisection in D on the convexity indicator over [2, 4 (2+mu)^2 csc^2(2a)].
/// Returns the threshold D_a above which the cone shape is nonconvex.
double convexity_threshold_D(const ConeGeometry& cone, const ModelParams& params,
                             double rel_tol = 1e-3);

struct SpeedBounds {
  double lower;
  double upper;
};

struct UnequalBoundsOptions {
  /// Permit a >= pi/4, where the bounds are not backed by a proof.
  bool force = false;
  /// Raise the lower bound to the equal-diffusivity cone speed at D.
  bool augment_with_equal_case = true;
};

/// Bracket on the cone speed when Gamma_a diffuses faster (D_tilde > D).
/// lower = max{c_*(pi - 2a - theta; D_tilde), c_{*a}(theta; D)},
/// upper = max{c_*(theta; D_tilde), c_*(pi - 2a - theta; D_tilde)}.
SpeedBounds unequal_diffusion_speed_bounds(double theta, const ConeGeometry& cone,
                                           const ModelParams& params,
                                           UnequalBoundsOptions options = {});

}  // namespace roadfield
