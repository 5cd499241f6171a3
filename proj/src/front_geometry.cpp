#include "roadfield/front_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "roadfield/numerics.hpp"
#include "roadfield/parallel.hpp"

namespace roadfield {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double min_ratio_speed(const EffectiveRoadHamiltonian& h) {
  const double D = h.params().D;
  const double hi = D / std::sqrt(D - 1.0) + 1.0;
  const double tol = 1e-10 * std::min(1.0, h.q_crit());
  return numerics::golden_section([&](double q) { return h.eval(q) / q; }, 1e-3 * tol, hi, tol)
      .value;
}

double lagrangian_zero_speed(const RoadLagrangian& lr) {
  const double D = lr.params().D;
  const double hi = D / std::sqrt(D - 1.0) + 1.0;
  return numerics::bisect([&](double c) { return lr.eval(c); }, 0.0, hi, 1e-13);
}

}  // namespace

double WulffSample::x() const { return speed * std::sin(theta); }
double WulffSample::y() const { return theta == kHalfPi || theta == -kHalfPi ? 0.0 : speed * std::cos(theta); }

RoadSpeedReport road_speed_report(const ModelParams& params) {
  const RoadLagrangian lr(params);
  return {min_ratio_speed(lr.hamiltonian()), lagrangian_zero_speed(lr)};
}

double road_speed(const ModelParams& params) {
  const RoadSpeedReport r = road_speed_report(params);
  if (std::fabs(r.by_min_ratio - r.by_lagrangian) > 1e-7) {
    throw ConsistencyError("road speed characterizations disagree: min H_r(q)/q = " +
                           std::to_string(r.by_min_ratio) +
                           ", zero of L_r = " + std::to_string(r.by_lagrangian));
  }
  return r.by_min_ratio;
}

FrontGeometry::FrontGeometry(const ModelParams& params)
    : vf_(params), road_speed_(roadfield::road_speed(params)) {}

double FrontGeometry::directional_speed(double theta) const {
  const double a = std::fabs(theta);
  if (!(a <= kHalfPi + kAngleTolerance)) {
    throw InvalidConfig("direction must satisfy |theta| <= pi/2");
  }
  const double s = std::sin(std::min(a, kHalfPi));
  const double c = a >= kHalfPi ? 0.0 : std::cos(a);
  auto along_ray = [&](double r) { return vf_.value(1.0, r * s, r * c); };
  // J(1, .) < 0 at radius 1 and > 0 past max(4, 2 c_*(pi/2)).
  const double c_max = std::max(4.0, 2.0 * road_speed_);
  return numerics::brent_root(along_ray, 1.0, c_max, kSpeedTolerance);
}

double FrontGeometry::critical_angle() const {
  if (params().D <= 2.0) return kHalfPi;
  constexpr double eps_angle = 1e-6;
  return numerics::bisect_predicate(
      [&](double theta) { return directional_speed(theta) > 2.0 + eps_angle; }, 0.0, kHalfPi,
      1e-8);
}

double FrontGeometry::lower_shape_angle() const {
  return std::asin(std::min(1.0, 2.0 / road_speed_));
}

double FrontGeometry::lower_shape_speed(double theta) const {
  const double a = std::fabs(theta);
  if (!(a <= kHalfPi + kAngleTolerance)) {
    throw InvalidConfig("direction must satisfy |theta| <= pi/2");
  }
  const double kink = lower_shape_angle();
  if (a <= kink) return 2.0;
  return 2.0 / std::cos(a - kink);
}

WulffShape FrontGeometry::sample_wulff(int n) const {
  if (n < 8) throw InvalidConfig("Wulff sampling needs n >= 8");
  std::vector<double> speeds(static_cast<std::size_t>(n));
  std::vector<double> thetas(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) thetas[i] = kHalfPi * static_cast<double>(i) / (n - 1);
  parallel_for(speeds.size(), [&](std::size_t i) { speeds[i] = directional_speed(thetas[i]); });

  WulffShape shape;
  shape.params = params();
  shape.road_speed = road_speed_;
  for (int i = n - 1; i >= 1; --i) shape.samples.push_back({-thetas[i], speeds[i]});
  for (int i = 0; i < n; ++i) shape.samples.push_back({thetas[i], speeds[i]});
  shape.theta_star = critical_angle();
  shape.theta_star_violation =
      params().D > 2.0 && shape.theta_star >= lower_shape_angle() - kAngleTolerance;
  shape.convex = shape.samples.size() >= 16 ? convexity_check(shape)
                                            : convexity_check(sample_wulff(16));
  return shape;
}

double directional_speed(double theta, const ModelParams& params) {
  return FrontGeometry(params).directional_speed(theta);
}
double critical_angle(const ModelParams& params) { return FrontGeometry(params).critical_angle(); }
WulffShape sample_wulff(const ModelParams& params, int n) {
  return FrontGeometry(params).sample_wulff(n);
}
double lower_shape_speed(double theta, const ModelParams& params) {
  return FrontGeometry(params).lower_shape_speed(theta);
}

double large_D_asymptote(const ModelParams& params) {
  const double mu = params.mu;
  const double kn = params.kappa * params.nu;
  if (!(mu > 0.0) || !(kn > 0.0)) throw InvalidConfig("mu, nu, kappa must be positive");
  auto zeta = [&](double theta) {
    if (theta <= 1.0) return 0.0;
    return numerics::bisect(
        [&](double z) { return z * z + 1.0 + mu * z / (kn + z) - theta * theta; }, 0.0, theta,
        1e-14 * theta);
  };
  auto objective = [&](double theta) {
    const double z = zeta(theta);
    return (1.0 + z * z) / theta;
  };
  double hi = 2.0;
  for (int i = 0; i < 200 && objective(2.0 * hi) <= objective(hi); ++i) hi *= 2.0;
  return numerics::golden_section(objective, 1.0, 2.0 * hi, 1e-12 * hi).value;
}

bool convexity_check(const WulffShape& shape) {
  if (shape.samples.size() < 16) throw InvalidConfig("convexity check needs at least 16 samples");
  const ValueFunction vf(shape.params);
  for (std::size_t k = 0; k + 1 < shape.samples.size(); ++k) {
    const auto& a = shape.samples[k];
    const auto& b = shape.samples[k + 1];
    const double mx = 0.5 * (a.x() + b.x());
    const double my = std::max(0.0, 0.5 * (a.y() + b.y()));
    if (vf.value(1.0, mx, my) > 1e-6) return false;
  }
  return true;
}

}  // namespace roadfield
