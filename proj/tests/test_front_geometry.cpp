#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roadfield/front_geometry.hpp"

using namespace roadfield;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

ModelParams base(double D, double mu = 1.0) {
  ModelParams p;
  p.D = D;
  p.mu = mu;
  return p;
}

double bisect(auto f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Radius at which J(1, .) changes sign along the ray theta.
double ray_speed(double theta, const ModelParams& P) {
  const ValueFunction vf(P);
  return bisect([&](double r) { return vf.value(1.0, r * std::sin(theta), r * std::cos(theta)); },
                0.5, 50.0);
}

// Dense-grid minimum of (1 + zeta^2)/theta over theta in (0, 6].
double asymptote_oracle(const ModelParams& P) {
  const double kn = P.kappa * P.nu;
  double best = 1e300;
  for (int i = 1; i <= 60000; ++i) {
    const double th = 6.0 * i / 60000.0;
    double zeta = 0.0;
    if (th > 1.0) {
      zeta = bisect([&](double z) { return z * z + 1.0 + P.mu * z / (kn + z) - th * th; }, 0.0, th);
    }
    best = std::min(best, (1.0 + zeta * zeta) / th);
  }
  return best;
}

}  // namespace

TEST_CASE("road speed at D = 9 agrees with a grid minimum of H_r(q)/q") {
  const ModelParams P = base(9.0);
  const RoadSpeedReport r = road_speed_report(P);
  CHECK(r.by_min_ratio == doctest::Approx(r.by_lagrangian).epsilon(1e-9));
  const EffectiveRoadHamiltonian H(P);
  double best = 1e300;
  for (int i = 1; i <= 40000; ++i) {
    const double q = 2.0 * i / 40000.0;
    best = std::min(best, H.eval(q) / q);
  }
  CHECK(best == doctest::Approx(3.0662060172578696).epsilon(1e-7));
  CHECK(road_speed(P) == doctest::Approx(3.0662060172578696).epsilon(1e-12));
}

TEST_CASE("no enhancement for D <= 2") {
  for (double D : {1.2, 1.5, 2.0}) {
    const FrontGeometry fg(base(D));
    CHECK(fg.road_speed() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fg.critical_angle() == doctest::Approx(kHalfPi));
    for (double th : {0.0, 0.5, 1.2, kHalfPi}) CHECK(fg.directional_speed(th) == doctest::Approx(2.0).epsilon(1e-8));
  }
  CHECK(road_speed(base(2.5)) > 2.0);
}

TEST_CASE("directional speed matches the zero of J along each ray") {
  const ModelParams P = base(9.0);
  const FrontGeometry fg(P);
  for (double th : {0.0, 0.4, 0.8, 1.2, 1.5}) {
    CAPTURE(th);
    CHECK(fg.directional_speed(th) == doctest::Approx(ray_speed(th, P)).epsilon(1e-8));
  }
  CHECK(fg.directional_speed(kHalfPi) == doctest::Approx(fg.road_speed()).epsilon(1e-9));
  CHECK(fg.directional_speed(-0.8) == doctest::Approx(fg.directional_speed(0.8)));
}

TEST_CASE("critical angle") {
  const ModelParams P = base(9.0);
  const FrontGeometry fg(P);
  const EffectiveRoadHamiltonian H(P);
  const double exact = bisect([&](double th) { return std::sin(th) - H.g(std::cos(th)); }, 0.0, kHalfPi);
  CHECK(exact == doctest::Approx(0.5501686622).epsilon(1e-9));
  // The plateau edge is located by c - 2 > 1e-6; the quadratic onset puts it
  // about 1e-3 beyond the exact root.
  CHECK(fg.critical_angle() == doctest::Approx(0.5512207502).epsilon(1e-9));
  CHECK(std::abs(fg.critical_angle() - exact) < 5e-3);
  CHECK(fg.directional_speed(fg.critical_angle() - 0.01) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fg.directional_speed(fg.critical_angle() + 0.01) > 2.0);
  for (double D : {3.0, 9.0, 50.0, 400.0}) {
    const double ts = critical_angle(base(D));
    CHECK(ts >= std::asin(7.0 / (16.0 * std::sqrt(D - 1.0))));
    CHECK(ts < std::min(kHalfPi, std::asin(std::min(1.0, 3.0 / std::sqrt(D)))));
    CHECK(ts < std::asin(2.0 / road_speed(base(D))));
  }
}

TEST_CASE("speed is nondecreasing in D and in |theta|") {
  for (double th : {0.3, 0.9, 1.4}) {
    double prev = 0.0;
    for (double D : {2.0, 4.0, 9.0, 25.0}) {
      const double c = directional_speed(th, base(D));
      CHECK(c >= prev - 1e-10);
      prev = c;
    }
  }
  const FrontGeometry fg(base(9.0));
  double prev = 0.0;
  for (double th = 0.0; th <= kHalfPi; th += 0.05) {
    const double c = fg.directional_speed(th);
    CHECK(c >= prev - 1e-10);
    prev = c;
  }
}

TEST_CASE("lower shape: road segment plus the unit-speed disk") {
  const FrontGeometry fg(base(9.0));
  CHECK(fg.lower_shape_angle() == doctest::Approx(std::asin(2.0 / fg.road_speed())));
  CHECK(fg.lower_shape_angle() == doctest::Approx(0.7105778636872385).epsilon(1e-10));
  CHECK(fg.lower_shape_speed(0.0) == doctest::Approx(2.0));
  CHECK(fg.lower_shape_speed(0.5) == doctest::Approx(2.0));
  CHECK(fg.lower_shape_speed(kHalfPi) == doctest::Approx(fg.road_speed()));
  for (double th = 0.0; th <= kHalfPi; th += 0.03) {
    CHECK(fg.lower_shape_speed(th) <= fg.directional_speed(th) + 1e-9);
  }
}

TEST_CASE("Wulff shape sampling") {
  const WulffShape w = sample_wulff(base(9.0), 64);
  REQUIRE(w.samples.size() >= 16);
  CHECK(w.samples.front().theta == doctest::Approx(-kHalfPi));
  CHECK(w.samples.back().theta == doctest::Approx(kHalfPi));
  CHECK(w.convex);
  CHECK_FALSE(w.theta_star_violation);
  CHECK(convexity_check(w));
  for (const auto& s : w.samples) {
    CHECK(s.x() == doctest::Approx(s.speed * std::sin(s.theta)));
    CHECK(s.y() == doctest::Approx(s.speed * std::cos(s.theta)));
    CHECK(s.y() <= 2.0 + 1e-9);
    if (s.theta > w.theta_star) CHECK(s.speed <= 2.0 / std::cos(s.theta - w.theta_star) + 1e-4);
  }
}

TEST_CASE("convexity check rejects a dented shape") {
  WulffShape w = sample_wulff(base(9.0), 64);
  w.samples[w.samples.size() / 2 + 10].speed *= 1.2;
  CHECK_FALSE(convexity_check(w));
  w.samples.resize(8);
  CHECK_THROWS((void)convexity_check(w));
}

TEST_CASE("large-D asymptote") {
  CHECK(large_D_asymptote(base(9.0)) == doctest::Approx(0.9455107237412258).epsilon(1e-9));
  CHECK(asymptote_oracle(base(9.0)) == doctest::Approx(0.9455107237412258).epsilon(1e-6));
  CHECK(large_D_asymptote(base(9.0, 1e-8)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(road_speed(base(1e6)) / 1e3 == doctest::Approx(0.9455107237412258).epsilon(1e-5));
}

TEST_CASE("asymptote follows the quarter-power law for large mu" * doctest::may_fail()) {
  const double mu = 1e4;
  CHECK(large_D_asymptote(base(9.0, mu)) ==
        doctest::Approx(4.0 / (std::pow(3.0, 0.75) * std::pow(mu, 0.25))).epsilon(0.05));
}
