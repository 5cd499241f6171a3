#pragma once

#include <vector>

#include "roadfield/value_function.hpp"

namespace roadfield {

/// Directional spreading speed c_*(theta); theta is measured from the
/// positive y-axis, so theta = +-pi/2 points along the road.
struct WulffSample {
  double theta;
  double speed;
  [[nodiscard]] double x() const;
  [[nodiscard]] double y() const;
};

/// Sampled boundary of the asymptotic invasion shape {J(1, .) <= 0}.
struct WulffShape {
  ModelParams params;
  /// Ordered by theta from -pi/2 to pi/2.
  std::vector<WulffSample> samples;
  double theta_star = 0.0;
  double road_speed = 0.0;
  bool convex = false;
  /// Set when theta_star >= arcsin(2 / road_speed) for D > 2, which the theory
  /// rules out.
  bool theta_star_violation = false;
};

/// Speeds along the road, in every direction, and the shape they trace.
/// Caches the road speed; immutable after construction.
class FrontGeometry {
 public:
  static constexpr double kAngleTolerance = 1e-6;
  static constexpr double kSpeedTolerance = 1e-11;

  explicit FrontGeometry(const ModelParams& params);

  [[nodiscard]] const ValueFunction& value_function() const { return vf_; }
  [[nodiscard]] const ModelParams& params() const { return vf_.params(); }

  /// min_{q>0} H_r(q)/q, cross-checked against the positive zero of L_r.
  [[nodiscard]] double road_speed() const { return road_speed_; }
  [[nodiscard]] double directional_speed(double theta) const;
  [[nodiscard]] double critical_angle() const;
  /// arcsin(2 / road_speed): the kink angle of the road-plus-disk hull.
  [[nodiscard]] double lower_shape_angle() const;
  [[nodiscard]] double lower_shape_speed(double theta) const;
  [[nodiscard]] WulffShape sample_wulff(int n) const;

 private:
  ValueFunction vf_;
  double road_speed_;
};

/// Both characterizations of the road speed, returned separately for
/// reporting.
struct RoadSpeedReport {
  double by_min_ratio;   ///< min_{q>0} H_r(q)/q
  double by_lagrangian;  ///< positive root of L_r(c) = 0
};
RoadSpeedReport road_speed_report(const ModelParams& params);

/// Throws ConsistencyError if the two characterizations differ by > 1e-7.
double road_speed(const ModelParams& params);
double directional_speed(double theta, const ModelParams& params);
double critical_angle(const ModelParams& params);
WulffShape sample_wulff(const ModelParams& params, int n);
double lower_shape_speed(double theta, const ModelParams& params);

/// lim_{D->inf} c_*(pi/2)/sqrt(D) = min_{theta>0} (1 + zeta_theta^2)/theta,
/// where zeta_theta solves theta^2 = zeta^2 + 1 + mu zeta/(kappa nu + zeta)
/// (zero for theta <= 1). Only mu, nu, kappa are read.
double large_D_asymptote(const ModelParams& params);

/// Midpoint test on adjacent boundary samples: every midpoint must satisfy
/// J(1, midpoint) <= 1e-6. Requires at least 16 samples.
bool convexity_check(const WulffShape& shape);

}  // namespace roadfield
