#include "roadfield/conical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roadfield/numerics.hpp"
#include "roadfield/parallel.hpp"

namespace roadfield {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kAngleTol = 1e-6;
}  // namespace

ConeGeometry::ConeGeometry(double a) : a_(a) {
  if (!(a > 0.0 && a <= kHalfPi + 1e-15)) throw InvalidConfig("cone half-angle must lie in (0, pi/2]");
  c2_ = std::cos(2.0 * a);
  s2_ = std::sin(2.0 * a);
}

Point2 ConeGeometry::reflect(double x, double y) const {
  return {c2_ * x + s2_ * y, s2_ * x - c2_ * y};
}

bool ConeGeometry::contains(double x, double y) const {
  if (x == 0.0 && y == 0.0) return true;
  const double phi = std::atan2(y, x);  // polar angle from the x-axis
  return phi >= -kAngleTol && phi <= 2.0 * a_ + kAngleTol;
}

double ConeGeometry::far_road_theta() const { return kHalfPi - 2.0 * a_; }
double ConeGeometry::bisector_theta() const { return kHalfPi - a_; }

Point2 reflect(double a, double x, double y) { return ConeGeometry(a).reflect(x, y); }

double solve_Ja(double t, double x, double y, const ConeGeometry& cone, const ModelParams& params) {
  if (params.D_tilde) {
    throw InvalidConfig("the min formula holds only for equal road diffusivities");
  }
  if (!cone.contains(x, y)) throw InvalidConfig("point lies outside the cone");
  const ValueFunction vf(params);
  const Point2 r = cone.reflect(x, y);
  // Reflection maps the closed cone onto itself; clip rounding below the road.
  return std::min(vf.value(t, x, std::max(0.0, y)), vf.value(t, r.x, std::max(0.0, r.y)));
}

double cone_speed(double theta, const ConeGeometry& cone, const FrontGeometry& geometry) {
  const double lo = cone.far_road_theta();
  if (theta < lo - kAngleTol || theta > kHalfPi + kAngleTol) {
    throw InvalidConfig("direction lies outside the cone sector");
  }
  if (theta >= cone.bisector_theta()) return geometry.directional_speed(std::min(theta, kHalfPi));
  return geometry.directional_speed(std::min(kHalfPi, std::numbers::pi - 2.0 * cone.a() - theta));
}

double cone_speed(double theta, const ConeGeometry& cone, const ModelParams& params) {
  return cone_speed(theta, cone, FrontGeometry(params.with_D(params.D)));
}

double ConeSample::x() const { return speed * std::sin(theta); }
double ConeSample::y() const { return speed * std::cos(theta); }

bool cone_convex(const ConeGeometry& cone, const ModelParams& params) {
  const double theta_star = FrontGeometry(params.with_D(params.D)).critical_angle();
  return cone.a() >= kHalfPi - theta_star - kAngleTol;
}

ConeWulffShape cone_wulff(const ConeGeometry& cone, const ModelParams& params, int n) {
  if (n < 16) throw InvalidConfig("cone Wulff sampling needs n >= 16");
  const ModelParams p = params.with_D(params.D);
  const FrontGeometry geo(p);
  ConeWulffShape shape;
  shape.params = p;
  shape.a = cone.a();
  shape.road_speed = geo.road_speed();
  shape.theta_star = geo.critical_angle();

  const double lo = cone.far_road_theta();
  const double span = 2.0 * cone.a();
  shape.samples.resize(static_cast<std::size_t>(n));
  parallel_for(shape.samples.size(), [&](std::size_t i) {
    const double theta = i + 1 == shape.samples.size()
                             ? kHalfPi
                             : lo + span * static_cast<double>(i) / (n - 1);
    shape.samples[i] = {theta, cone_speed(theta, cone, geo),
                        theta >= cone.bisector_theta() ? 0 : 1};
  });

  shape.convex = cone.a() >= kHalfPi - shape.theta_star - kAngleTol;

  // Supporting line at the bisector point, normal to the bisector direction.
  const double tb = cone.bisector_theta();
  const double support = geo.directional_speed(tb);
  const double ux = std::sin(tb);
  const double uy = std::cos(tb);
  bool inside = true;
  for (const auto& s : shape.samples) {
    if (s.x() * ux + s.y() * uy > support + 1e-7) inside = false;
  }
  shape.supporting_line_convex = inside;
  return shape;
}

double convexity_threshold_D(const ConeGeometry& cone, const ModelParams& params, double rel_tol) {
  if (!(cone.a() < kHalfPi)) throw InvalidConfig("the half-plane shape is convex for every D");
  const double csc = 1.0 / std::sin(2.0 * cone.a());
  double lo = 2.0;
  double hi = 4.0 * (2.0 + params.mu) * (2.0 + params.mu) * csc * csc;
  if (!cone_convex(cone, params.with_D(lo))) return lo;
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (cone_convex(cone, params.with_D(mid))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

SpeedBounds unequal_diffusion_speed_bounds(double theta, const ConeGeometry& cone,
                                           const ModelParams& params,
                                           UnequalBoundsOptions options) {
  if (!params.D_tilde) throw InvalidConfig("unequal-diffusion bounds need D_tilde");
  params.validate();
  if (cone.a() >= std::numbers::pi / 4.0 && !options.force) {
    throw InvalidConfig("bounds for a >= pi/4 are unverified; pass force to compute them");
  }
  const double lo_theta = cone.far_road_theta();
  if (theta < lo_theta - kAngleTol || theta > kHalfPi + kAngleTol) {
    throw InvalidConfig("direction lies outside the cone sector");
  }
  const FrontGeometry fast(params.with_D(*params.D_tilde));
  const double mirrored = std::numbers::pi - 2.0 * cone.a() - theta;
  auto clamp = [](double th) { return std::clamp(th, -kHalfPi, kHalfPi); };

  const double fast_mirror = fast.directional_speed(clamp(mirrored));
  const double fast_direct = fast.directional_speed(clamp(theta));
  SpeedBounds b{fast_mirror, std::max(fast_direct, fast_mirror)};
  if (options.augment_with_equal_case) {
    const FrontGeometry slow(params.with_D(params.D));
    b.lower = std::max(b.lower, cone_speed(theta, cone, slow));
  }
  return b;
}

}  // namespace roadfield
