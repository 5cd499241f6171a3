#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "roadfield/front_geometry.hpp"
#include "roadfield/rd_simulator.hpp"

using namespace roadfield;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

ModelParams base(double D) {
  ModelParams p;
  p.D = D;
  return p;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("initial state") {
  const RDState s = init_state(base(9.0), 20.0, 10.0, 0.5, 1.0);
  CHECK(s.nx == 81);
  CHECK(s.ny == 21);
  CHECK(s.x_of(0) == doctest::Approx(-20.0));
  CHECK(s.v(40, 0) == 1.0);
  CHECK(s.v(40, 2) == 1.0);
  CHECK(s.v(40, 3) == 0.0);
  CHECK(s.v(46, 0) == 0.0);
  CHECK(s.U[40] == doctest::Approx(1.0));
  CHECK(s.U[42] == doctest::Approx(1.0));
  CHECK(s.U[43] == 0.0);
  CHECK(s.dt <= 0.9 * 0.25 / 36.0);
  CHECK(s.dt == doctest::Approx(stable_time_step(base(9.0), 0.5, false)));
  CHECK_THROWS_AS(init_state(base(9.0), 20.0, 10.0, 0.5, 0.5), InvalidConfig);
  CHECK_THROWS_AS(init_state(base(9.0), 5.0, 10.0, 0.5, 1.0), InvalidConfig);
  CHECK(s.field_at(0.0, 0.5).value() == doctest::Approx(1.0));
  CHECK_FALSE(s.field_at(100.0, 0.5).has_value());

  const RDState fine = init_state(base(9.0), 10.0, 10.0, 0.1, 1.0);
  CHECK(fine.field_at(0.5, 0.5).value() == 1.0);
  CHECK(fine.field_at(3.0, 0.0).value() == 0.0);
  CHECK(fine.field_mass() == doctest::Approx(std::numbers::pi / 2.0).epsilon(0.03));
  for (double th : {0.0, 0.7, kHalfPi}) {
    CHECK(extract_front(fine, 0.5, th).value() == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("uniform equilibria are fixed points") {
  ModelParams P = base(9.0);
  P.mu = 2.0;
  P.nu = 0.5;
  for (double level : {0.0, 1.0}) {
    RDState s = init_state(P, 10.0, 10.0, 0.5, 1.0);
    s.guard = false;
    std::fill(s.V.begin(), s.V.end(), level);
    std::fill(s.U.begin(), s.U.end(), level * P.nu / P.mu);
    for (int k = 0; k < 50; ++k) step(s);
    for (double v : s.V) CHECK(v == doctest::Approx(level).epsilon(1e-14));
    for (double u : s.U) CHECK(u == doctest::Approx(level * P.nu / P.mu).epsilon(1e-14));
  }
}

TEST_CASE("a single step stays within the invariant box") {
  ModelParams P = base(9.0);
  P.mu = 3.0;
  RDState s = init_state(P, 20.0, 20.0, 0.25, 1.0);
  for (int k = 0; k < 200; ++k) {
    step(s);
    CHECK(*std::min_element(s.V.begin(), s.V.end()) >= 0.0);
    CHECK(*std::max_element(s.V.begin(), s.V.end()) <= 1.0 + 1e-12);
    CHECK(*std::min_element(s.U.begin(), s.U.end()) >= 0.0);
    CHECK(*std::max_element(s.U.begin(), s.U.end()) <= s.road_capacity() + 1e-12);
  }
  CHECK(s.t == doctest::Approx(200 * s.dt));
  const RDState next = stepped(s);
  CHECK(next.t > s.t);
}

TEST_CASE("speed estimation") {
  std::vector<double> t, r;
  for (int i = 0; i < 20; ++i) {
    t.push_back(10.0 + i);
    r.push_back(2.0 * t.back());
  }
  const SpeedEstimate exact = estimate_speed(t, r);
  CHECK(exact.speed == doctest::Approx(2.0));
  CHECK(exact.intercept == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(exact.residual_rms < 1e-12);
  CHECK(exact.points == 20);

  // For r = 3t + sqrt(t) on [10, 29] the fitted slope exceeds 3 by at most
  // the largest derivative of the correction, 1/(2 sqrt(10)).
  for (std::size_t i = 0; i < t.size(); ++i) r[i] = 3.0 * t[i] + std::sqrt(t[i]);
  const SpeedEstimate biased = estimate_speed(t, r);
  CHECK(biased.speed > 3.0);
  CHECK(biased.speed < 3.0 + 0.5 / std::sqrt(10.0));

  t.resize(9);
  r.resize(9);
  CHECK_THROWS_AS(estimate_speed(t, r), InvalidConfig);

  std::vector<FrontPoint> history;
  for (int i = 0; i <= 40; ++i) {
    history.push_back({0.5 * i, 0.0, 1.0 + 2.0 * 0.5 * i});
    history.push_back({0.5 * i, kHalfPi, 4.0 * 0.5 * i});
  }
  CHECK(estimate_speed(history, kHalfPi).speed == doctest::Approx(4.0));
  CHECK(estimate_speed(history, 0.0).points == 21);
}

TEST_CASE("snapshot round trip") {
  ModelParams P = base(9.0);
  P.D_tilde = 12.0;
  RDState s = init_cone_state(P, std::numbers::pi / 6.0, 12.0, 0.4, 1.0);
  for (int k = 0; k < 20; ++k) step(s);
  const auto path = temp_file("roadfield_snapshot_test.bin");
  write_snapshot(s, path.string());
  const RDState r = read_snapshot(path.string());
  std::filesystem::remove(path);
  CHECK(r.nx == s.nx);
  CHECK(r.ny == s.ny);
  CHECK(r.t == s.t);
  CHECK(r.h == s.h);
  CHECK(r.x_min == s.x_min);
  CHECK(r.params.D == s.params.D);
  CHECK(r.params.D_tilde.value() == 12.0);
  CHECK(r.cone_a.value() == s.cone_a.value());
  CHECK(r.V == s.V);
  CHECK(r.U == s.U);
  CHECK(r.U_far == s.U_far);
  CHECK_THROWS(read_snapshot(temp_file("roadfield_missing_snapshot.bin").string()));
}

TEST_CASE("cone of half-angle pi/2 reproduces the half-plane") {
  const ModelParams P = base(4.0);
  RDState half = init_state(P, 12.0, 12.0, 0.4, 1.0);
  RDState cone = init_cone_state(P, kHalfPi, 12.0, 0.4, 1.0);
  REQUIRE(half.nx == cone.nx);
  REQUIRE(half.ny == cone.ny);
  const double dt = std::min(half.dt, cone.dt);
  half.dt = cone.dt = dt;
  for (int k = 0; k < 300; ++k) {
    step(half);
    step(cone);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < half.V.size(); ++i) worst = std::max(worst, std::abs(half.V[i] - cone.V[i]));
  // Left of the corner the road density lives on the second road.
  const std::size_t i0 = half.nx / 2;
  for (std::size_t i = i0; i < half.nx; ++i) worst = std::max(worst, std::abs(half.U[i] - cone.U[i]));
  for (std::size_t k = 0; k <= i0; ++k) worst = std::max(worst, std::abs(half.U[i0 - k] - cone.U_far[k]));
  CHECK(worst < 1e-12);
}

TEST_CASE("fronts move outward") {
  SimulationConfig cfg;
  cfg.h = 0.4;
  cfg.Lx = 60.0;
  cfg.Ly = 40.0;
  cfg.t_max = 15.0;
  cfg.thetas = {0.0, 0.8, kHalfPi};
  const SimulationResult res = run_simulation(base(9.0), cfg);
  CHECK(res.bounds_respected);
  for (double th : cfg.thetas) {
    double prev = 0.0;
    for (const auto& p : res.history) {
      if (p.theta != th) continue;
      CHECK(p.radius >= prev - 0.5 * cfg.h);
      prev = p.radius;
    }
    CHECK(prev > 10.0);
  }
}

TEST_CASE("decoupled road: the field spreads isotropically at speed 2") {
  ModelParams P = base(2.0);
  P.kappa = 0.0;
  SimulationConfig cfg;
  cfg.h = 0.4;
  cfg.Lx = 80.0;
  cfg.Ly = 80.0;
  cfg.t_max = 30.0;
  cfg.thetas = {0.0, std::numbers::pi / 4.0};
  const SimulationResult res = run_simulation(P, cfg);
  const double c0 = res.speeds[0].speed, c1 = res.speeds[1].speed;
  CAPTURE(c0);
  CAPTURE(c1);
  CHECK(std::abs(c0 - c1) <= 0.05 * c0);
  CHECK(c0 == doctest::Approx(2.0).epsilon(0.05));
  CHECK(c1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("grid refinement changes the road front speed by under 3%") {
  SimulationConfig cfg;
  cfg.Lx = 90.0;
  cfg.Ly = 40.0;
  cfg.t_max = 20.0;
  cfg.thetas = {kHalfPi};
  cfg.h = 0.4;
  const double coarse = run_simulation(base(9.0), cfg).speeds[0].speed;
  cfg.h = 0.2;
  const double fine = run_simulation(base(9.0), cfg).speeds[0].speed;
  CAPTURE(coarse);
  CAPTURE(fine);
  CHECK(std::abs(coarse - fine) <= 0.03 * fine);
  CHECK(fine > 2.0);
}

TEST_CASE("guard stops runs whose front reaches the truncated boundary") {
  SimulationConfig cfg;
  cfg.h = 0.4;
  cfg.Lx = 20.0;
  cfg.Ly = 20.0;
  cfg.t_max = 30.0;
  cfg.thetas = {0.0};
  CHECK_THROWS_AS(run_simulation(base(9.0), cfg), FrontGuardError);
}

TEST_CASE("slanted road carries the front like the axis road") {
  ModelParams P = base(9.0);
  SimulationConfig cfg;
  cfg.h = 0.4;
  cfg.Lx = 60.0;
  cfg.Ly = 60.0;
  cfg.t_max = 14.0;
  cfg.cone_a = std::numbers::pi / 6.0;
  const double far = kHalfPi - std::numbers::pi / 3.0;
  cfg.thetas = {kHalfPi, far};
  const SimulationResult res = run_simulation(P, cfg);
  CHECK(res.bounds_respected);
  const double near_r = extract_front(res.final_state, 0.5, kHalfPi).value();
  const double far_r = extract_front(res.final_state, 0.5, far).value();
  CAPTURE(near_r);
  CAPTURE(far_r);
  CHECK(std::abs(near_r - far_r) <= 0.05 * near_r);
}
