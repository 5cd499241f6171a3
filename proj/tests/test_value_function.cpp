#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "roadfield/value_function.hpp"

using namespace roadfield;

namespace {

ModelParams base(double D) {
  ModelParams p;
  p.D = D;
  return p;
}

// Two-segment objective minimized over a uniform (tau, z) grid, then refined
// on a finer grid around the best node.
double grid_J(double x, double y, const ModelParams& P, int n) {
  const RoadLagrangian L(P);
  auto phi = [&](double tau, double z) {
    if (tau >= 1.0) return y == 0.0 && z == x ? L.eval(x) : std::numeric_limits<double>::infinity();
    double v = (1.0 - tau) * eval_Lf((x - z) / (1.0 - tau), y / (1.0 - tau));
    if (tau > 0.0) v += tau * L.eval(z / tau);
    else if (z != 0.0) return std::numeric_limits<double>::infinity();
    return v;
  };
  double best = std::numeric_limits<double>::infinity(), bt = 0.0, bz = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const double tau = double(i) / n, z = x * j / n;
      const double v = phi(tau, z);
      if (v < best) best = v, bt = tau, bz = z;
    }
  }
  const double dt = 2.0 / n, dz = 2.0 * x / n;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const double tau = bt - dt / 2.0 + dt * i / n, z = bz - dz / 2.0 + dz * j / n;
      if (tau < 0.0 || tau >= 1.0 || z < 0.0 || z > x) continue;
      best = std::min(best, phi(tau, z));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("pure field and pure road limits") {
  const ModelParams P = base(9.0);
  CHECK(solve_J(1.0, 0.0, 1.0, P).value == doctest::Approx(-0.75));
  CHECK(solve_J(2.0, 0.0, 3.0, P).value == doctest::Approx(9.0 / 8.0 - 2.0));
  CHECK(solve_J(1.0, 4.0, 0.0, P).value == doctest::Approx(eval_Lr(4.0, P)).epsilon(1e-10));
  CHECK(solve_J(1.0, 4.0, 0.0, P).value == doctest::Approx(0.3702536645051946).epsilon(1e-10));
  const LaxOleinikSolution road = solve_J(1.0, 2.5, 0.0, P);
  CHECK(road.tau0 == 1.0);
  CHECK(road.on_road_speed == doctest::Approx(2.5));
}

TEST_CASE("interior values agree with a grid oracle") {
  const ModelParams P = base(9.0);
  const double j1 = grid_J(1.5, 0.8, P, 300);
  const double j2 = grid_J(3.0, 0.5, P, 300);
  CHECK(j1 == doctest::Approx(-0.3791610751640272).epsilon(1e-5));
  CHECK(j2 == doctest::Approx(0.13810327379659648).epsilon(1e-5));
  CHECK(solve_J(1.0, 1.5, 0.8, P).value == doctest::Approx(-0.3791610751640272).epsilon(1e-9));
  CHECK(solve_J(1.0, 3.0, 0.5, P).value == doctest::Approx(0.13810327379659648).epsilon(1e-9));
  CHECK(solve_J(1.0, 1.5, 0.8, P).value <= j1 + 1e-12);
}

TEST_CASE("built-in grid oracle is consistent with the optimizer") {
  const ValueFunction vf(base(4.0));
  for (double x : {0.5, 2.0, 3.5}) {
    for (double y : {0.1, 1.0, 2.0}) {
      const double j = vf.value(1.0, x, y);
      const double o = vf.oracle(1.0, x, y, 201, 201);
      CHECK(j <= o + 1e-12);
      CHECK(o - j <= 1e-3);
    }
  }
  CHECK_THROWS_AS((void)vf.oracle(1.0, 1.0, 1.0, 1, 10), InvalidConfig);
}

TEST_CASE("scaling and evenness") {
  const ModelParams P = base(9.0);
  for (double t : {0.5, 2.0, 7.0}) {
    CHECK(solve_J(t, 2.0 * t, 1.0 * t, P).value ==
          doctest::Approx(t * solve_J(1.0, 2.0, 1.0, P).value).epsilon(1e-9));
  }
  CHECK(solve_J(1.0, -2.0, 1.0, P).value == doctest::Approx(solve_J(1.0, 2.0, 1.0, P).value));
}

TEST_CASE("gradient matches finite differences") {
  const ModelParams P = base(9.0);
  const Point2 g = grad_J(1.0, 2.0, 1.0, P);
  CHECK(g.x == doctest::Approx(0.46874045203319087).epsilon(1e-7));
  CHECK(g.y == doctest::Approx(0.6142007266135799).epsilon(1e-7));
  const double h = 1e-4;
  const double fx = (solve_J(1.0, 2.0 + h, 1.0, P).value - solve_J(1.0, 2.0 - h, 1.0, P).value) / (2 * h);
  const double fy = (solve_J(1.0, 2.0, 1.0 + h, P).value - solve_J(1.0, 2.0, 1.0 - h, P).value) / (2 * h);
  CHECK(g.x == doctest::Approx(fx).epsilon(1e-5));
  CHECK(g.y == doctest::Approx(fy).epsilon(1e-5));
  const Point2 gm = grad_J(1.0, -2.0, 1.0, P);
  CHECK(gm.x == doctest::Approx(-g.x));
  CHECK_THROWS((void)grad_J(1.0, 2.0, 0.0, P));
}

TEST_CASE("field segment leaves the road with the momenta of the road segment") {
  const ModelParams P = base(9.0);
  const LaxOleinikSolution s = solve_J(1.0, 3.0, 0.5, P);
  CHECK(s.tau0 > 0.0);
  CHECK(s.tau0 < 1.0);
  const RoadLagrangian L(P);
  CHECK(L.derivative(s.on_road_speed) == doctest::Approx(s.q0).epsilon(1e-6));
  CHECK(L.hamiltonian().solve_pq(s.q0) == doctest::Approx(s.p0).epsilon(1e-6));
  CHECK(s.field_velocity.x == doctest::Approx(2.0 * s.q0));
}

TEST_CASE("radial growth and rotation toward the road") {
  const ModelParams P = base(9.0);
  double prev = -1e9;
  for (double r = 0.2; r <= 6.0; r += 0.4) {
    const double j = solve_J(1.0, r * std::sin(0.7), r * std::cos(0.7), P).value;
    CHECK(j >= prev);
    prev = j;
  }
  prev = 1e9;
  for (double th = 0.0; th <= 1.5707963; th += 0.1) {
    const double j = solve_J(1.0, 2.0 * std::sin(th), 2.0 * std::cos(th), P).value;
    CHECK(j <= prev + 1e-12);
    prev = j;
  }
}

TEST_CASE("w clips at zero") {
  const ModelParams P = base(9.0);
  CHECK(eval_w(1.0, 0.0, 1.0, P) == 0.0);
  CHECK(eval_w(1.0, 3.0, 0.5, P) == doctest::Approx(0.13810327379659648).epsilon(1e-9));
  CHECK(eval_w(1.0, 0.0, 3.0, P) == doctest::Approx(1.25));
}

TEST_CASE("optimal path runs along the road and then straight") {
  const ModelParams P = base(9.0);
  const auto path = optimal_path(1.0, 3.0, 0.5, P, 41);
  REQUIRE(path.size() == 41);
  CHECK(path.front().position.x == doctest::Approx(0.0));
  CHECK(path.front().position.y == doctest::Approx(0.0));
  CHECK(path.back().position.x == doctest::Approx(3.0));
  CHECK(path.back().position.y == doctest::Approx(0.5));
  const LaxOleinikSolution s = solve_J(1.0, 3.0, 0.5, P);
  for (const auto& smp : path) {
    if (smp.s <= s.tau0) CHECK(smp.position.y == doctest::Approx(0.0));
    else CHECK(smp.position.y > 0.0);
  }
}

TEST_CASE("domain errors") {
  const ModelParams P = base(9.0);
  CHECK_THROWS_AS((void)solve_J(0.0, 1.0, 1.0, P), InvalidConfig);
  CHECK_THROWS_AS((void)solve_J(1.0, 1.0, -0.1, P), InvalidConfig);
}
