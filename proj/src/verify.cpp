#include "roadfield/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "roadfield/conical.hpp"
#include "roadfield/front_geometry.hpp"
#include "roadfield/numerics.hpp"
#include "roadfield/rd_simulator.hpp"

namespace roadfield {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2.0;

struct Outcome {
  double measured = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

// Deviation-style outcome: passes when the worst deviation is within tol.
Outcome deviation(double worst, double tol, std::string detail = {}) {
  return {worst, 0.0, tol, worst <= tol, std::move(detail)};
}

Outcome flag(bool ok, std::string detail = {}) {
  return {ok ? 1.0 : 0.0, 1.0, 0.0, ok, std::move(detail)};
}

class Suite {
 public:
  explicit Suite(bool print = false) : print_(print) {}

  void run(const std::string& group, const std::string& name, const std::string& basis,
           const std::function<Outcome()>& body, double time_limit = 0.0) {
    CheckResult r;
    r.group = group;
    r.name = group + "." + name;
    r.basis = basis;
    r.time_limit = time_limit;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = body();
      r.measured = o.measured;
      r.reference = o.reference;
      r.tolerance = o.tolerance;
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit > 0.0 && r.seconds > time_limit) {
      r.passed = false;
      r.detail += (r.detail.empty() ? "" : "; ") + std::string("runtime budget exceeded");
    }
    if (print_) std::cout << format_check(r) << std::endl;
    results_.push_back(std::move(r));
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  bool print_;
  std::vector<CheckResult> results_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Root of sin(theta) = g(cos(theta)): the onset of road use on the speed-2
// circle, an independent characterization of the critical angle.
double semi_analytic_theta_star(const ModelParams& params) {
  const EffectiveRoadHamiltonian hr(params);
  auto gap = [&](double th) { return std::sin(th) - hr.g(std::cos(th)); };
  if (gap(kHalfPi) <= 0.0) return kHalfPi;
  return numerics::bisect(gap, 0.0, kHalfPi, 1e-13);
}

double theta_star_upper(const ModelParams& p) {
  const double s = (2.0 + p.mu) / std::sqrt(p.D);
  return s >= 1.0 ? kHalfPi : std::min(kHalfPi, std::asin(s));
}

double theta_star_lower(const ModelParams& p) {
  return std::asin(std::min(1.0, 7.0 / (16.0 * std::sqrt(p.D - 1.0))));
}

double distance_to_roads(double x, double y, double a) {
  auto ray = [&](double ex, double ey) {
    const double s = x * ex + y * ey;
    return s >= 0.0 ? std::abs(x * ey - y * ex) : std::hypot(x, y);
  };
  return std::min(ray(1.0, 0.0), ray(std::cos(2.0 * a), std::sin(2.0 * a)));
}

// Largest supremum of q v - L(v) over a v-grid refined by Brent.
double grid_conjugate(const std::vector<double>& vs, const std::vector<double>& Ls, double q,
                      const RoadLagrangian& road) {
  std::size_t best = 0;
  double best_val = -1e300;
  for (std::size_t k = 0; k < vs.size(); ++k) {
    const double val = q * vs[k] - Ls[k];
    if (val > best_val) {
      best_val = val;
      best = k;
    }
  }
  const double lo = vs[best == 0 ? 0 : best - 1];
  const double hi = vs[std::min(best + 1, vs.size() - 1)];
  if (hi <= lo) return best_val;
  const auto m = numerics::brent_minimize([&](double v) { return road.eval(v) - q * v; }, lo, hi, 1e-12);
  return std::max(best_val, -m.value);
}

// ---------------------------------------------------------------- suites

void hamiltonian_suite(Suite& s, const ModelParams& P) {
  const EffectiveRoadHamiltonian hr(P);
  s.run("hamiltonians", "flux_identity", "H_r(q) = H_f(q, p_q) = F0(q, p_q) beyond q_crit", [&] {
    double worst = 0.0;
    for (int k = 1; k <= 200; ++k) {
      const double q = hr.q_crit() + (10.0 - hr.q_crit()) * k / 200.0;
      const double p = hr.solve_pq(q);
      const double h = hr.eval(q);
      const double scale = std::max(1.0, h);
      worst = std::max(worst, std::abs(h - eval_Hf(q, p)) / scale);
      worst = std::max(worst, std::abs(h - eval_F0(q, p, P).value()) / scale);
    }
    return deviation(worst, 10.0 * hr.tolerance(), "relative to max(1, H_r)");
  });
  s.run("hamiltonians", "convexity", "midpoint convexity of H_r on [-10, 10], step 0.01", [&] {
    std::vector<double> v;
    for (int k = 0; k <= 2000; ++k) v.push_back(hr.eval(-10.0 + 0.01 * k));
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
      worst = std::max(worst, v[k] - 0.5 * (v[k - 1] + v[k + 1]));
    }
    return deviation(worst, 1e-9, "max midpoint excess");
  });
  s.run("hamiltonians", "field_bound", "H_f(q, 0) <= H_r(q)", [&] {
    double worst = 0.0;
    for (int k = -100; k <= 100; ++k) {
      const double q = 0.1 * k;
      worst = std::max(worst, eval_Hf(q, 0.0) - hr.eval(q));
    }
    return deviation(worst, 1e-12);
  });
  s.run("hamiltonians", "monotone_in_D", "H_r nondecreasing in D over {2.5, 5, 9, 50}", [&] {
    double worst = 0.0;
    const std::vector<double> Ds{2.5, 5.0, 9.0, 50.0};
    for (int k = 0; k <= 40; ++k) {
      const double q = 0.25 * k;
      double prev = -1e300;
      for (double D : Ds) {
        const double h = eval_Hr(q, P.with_D(D));
        worst = std::max(worst, prev - h);
        prev = h;
      }
    }
    return deviation(worst, 1e-12);
  });
  s.run("hamiltonians", "evenness", "H_r(q) = H_r(-q)", [&] {
    double worst = 0.0;
    for (int k = 0; k <= 100; ++k) {
      const double q = 0.1 * k;
      worst = std::max(worst, std::abs(hr.eval(q) - hr.eval(-q)));
    }
    return deviation(worst, 0.0);
  });
  s.run("hamiltonians", "derivative", "H_r' matches central differences (rel. 1e-6)", [&] {
    double worst = 0.0;
    const double d = 1e-5;
    for (int k = -60; k <= 60; ++k) {
      const double q = 0.1 * k + 0.0123;
      if (std::abs(std::abs(q) - hr.q_crit()) < 1e-3) continue;
      const double fd = (hr.eval(q + d) - hr.eval(q - d)) / (2.0 * d);
      const double an = hr.derivative(q);
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
    }
    return deviation(worst, 1e-6);
  });
}

void legendre_suite(Suite& s, const ModelParams& P, const VerifyOptions& opt) {
  const RoadLagrangian road(P);
  const EffectiveRoadHamiltonian& hr = road.hamiltonian();
  const double shift = opt.inject_hr_fault ? opt.fault_size : 0.0;
  auto Hr = [&](double q) { return hr.eval(q) + shift; };

  s.run("legendre", "fenchel_identity", "L_r(H_r'(q)) = q H_r'(q) - H_r(q)", [&] {
    double worst = 0.0;
    for (int k = -100; k <= 100; ++k) {
      const double q = 0.05 * k;
      const double v = hr.derivative(q);
      worst = std::max(worst, std::abs(road.eval(v) - (q * v - Hr(q))));
    }
    return deviation(worst, 1e-8);
  });
  s.run("legendre", "double_conjugation", "sup_v [q v - L_r(v)] reproduces H_r on [-5, 5]", [&] {
    const double vmax = hr.derivative(5.0) + 1.0;
    std::vector<double> vs, Ls;
    for (double v = -vmax; v <= vmax; v += 1e-2) {
      vs.push_back(v);
      Ls.push_back(road.eval(v));
    }
    double worst = 0.0;
    for (int k = -20; k <= 20; ++k) {
      const double q = 0.25 * k;
      worst = std::max(worst, std::abs(grid_conjugate(vs, Ls, q, road) - Hr(q)));
    }
    return deviation(worst, 1e-6);
  });
  s.run("legendre", "quadratic_window", "L_r(v) = v^2/4 - 1 for |v| <= 2/sqrt(D-1)", [&] {
    double worst = 0.0;
    for (int k = -50; k <= 50; ++k) {
      const double v = road.window() * k / 50.0;
      worst = std::max(worst, std::abs(road.eval(v) - (v * v / 4.0 - 1.0)));
    }
    return deviation(worst, 1e-10);
  });
  s.run("legendre", "domination", "L_r(v) <= L_f(v, 0)", [&] {
    double worst = 0.0;
    for (int k = -100; k <= 100; ++k) {
      const double v = 0.1 * k;
      worst = std::max(worst, road.eval(v) - eval_Lf(v, 0.0));
    }
    return deviation(worst, 1e-12);
  });
  s.run("legendre", "monotone_convex", "L_r increasing in |v| and midpoint convex", [&] {
    double worst = 0.0;
    std::vector<double> L;
    for (int k = 0; k <= 200; ++k) L.push_back(road.eval(0.05 * k));
    for (std::size_t k = 1; k < L.size(); ++k) worst = std::max(worst, L[k - 1] - L[k]);
    for (std::size_t k = 1; k + 1 < L.size(); ++k) {
      worst = std::max(worst, L[k] - 0.5 * (L[k - 1] + L[k + 1]));
    }
    return deviation(worst, 1e-10);
  });
}

void value_suite(Suite& s, const ModelParams& P, bool quick) {
  const ValueFunction vf(P);
  std::mt19937 rng(20240719);
  std::uniform_real_distribution<double> ux(-5.0, 5.0), uy(0.0, 5.0);

  s.run("value", "scaling", "J(t, x, y) = t J(1, x/t, y/t)", [&] {
    double worst = 0.0;
    for (int k = 0; k < 12; ++k) {
      const double x = ux(rng), y = uy(rng);
      for (double t : {0.5, 1.0, 3.0, 10.0}) {
        const double lhs = vf.value(t, x, y);
        const double rhs = t * vf.value(1.0, x / t, y / t);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
      }
    }
    return deviation(worst, 1e-10);
  });
  s.run("value", "evenness", "J(1, x, y) = J(1, -x, y)", [&] {
    double worst = 0.0;
    for (int k = 0; k < 12; ++k) {
      const double x = ux(rng), y = uy(rng);
      worst = std::max(worst, std::abs(vf.value(1.0, x, y) - vf.value(1.0, -x, y)));
    }
    return deviation(worst, 1e-12);
  });
  s.run("value", "road_formula", "J(t, x, 0) = t L_r(x/t)", [&] {
    double worst = 0.0;
    for (int k = 0; k <= 20; ++k) {
      const double x = -6.0 + 0.6 * k;
      for (double t : {0.5, 2.0}) {
        worst = std::max(worst, std::abs(vf.value(t, x, 0.0) - t * vf.road().eval(x / t)));
      }
    }
    return deviation(worst, 1e-9);
  });
  s.run("value", "oracle_agreement", "|J - grid oracle (801 x 801)| <= 5e-3", [&] {
    double worst = 0.0;
    const int n = quick ? 2 : 4;
    for (int k = 0; k < n; ++k) {
      const double x = ux(rng), y = uy(rng);
      worst = std::max(worst, std::abs(vf.value(1.0, x, y) - vf.oracle(1.0, x, y, 801, 801)));
    }
    return deviation(worst, 5e-3);
  });
  s.run("value", "field_segment_identity",
        "J(s, gamma(s)) = (s - tau0)(H_r(q0) - 2) + tau0 L_r(H_r'(q0)) on the field segment", [&] {
          double worst = 0.0;
          int used = 0;
          for (const auto& [x, y] : {std::pair{3.0, 0.5}, std::pair{2.5, 1.0}, std::pair{4.0, 1.5},
                                     std::pair{1.5, 0.3}}) {
            const LaxOleinikSolution sol = vf.solve(1.0, x, y);
            if (!(sol.tau0 > 0.0)) continue;
            ++used;
            const auto& hr = vf.road().hamiltonian();
            const double q0 = sol.q0;
            for (double s_ : {sol.tau0, 0.5 * (sol.tau0 + 1.0), 1.0}) {
              const double px = sol.z0 + (s_ - sol.tau0) * 2.0 * q0;
              const double py = (s_ - sol.tau0) * 2.0 * sol.p0;
              const double lhs = vf.value(s_, px, py);
              const double rhs =
                  (s_ - sol.tau0) * (hr.eval(q0) - 2.0) + sol.tau0 * vf.road().eval(hr.derivative(q0));
              worst = std::max(worst, std::abs(lhs - rhs));
            }
          }
          if (used == 0) return Outcome{0.0, 0.0, 1e-6, false, "no road-using sample point"};
          return deviation(worst, 1e-6, std::to_string(used) + " road-using points");
        });
  s.run("value", "gradient", "grad J matches central differences (rel. 1e-4)", [&] {
    double worst = 0.0;
    const double d = 1e-5;
    for (int k = 0; k < 8; ++k) {
      const double x = ux(rng), y = 0.2 + uy(rng);
      const Point2 g = vf.gradient(1.0, x, y);
      const double gx = (vf.value(1.0, x + d, y) - vf.value(1.0, x - d, y)) / (2.0 * d);
      const double gy = (vf.value(1.0, x, y + d) - vf.value(1.0, x, y - d)) / (2.0 * d);
      const double scale = std::max(1.0, std::hypot(g.x, g.y));
      worst = std::max(worst, std::hypot(gx - g.x, gy - g.y) / scale);
    }
    return deviation(worst, 1e-4);
  });
  s.run("value", "radial_monotonicity", "(x, y) . grad J(1, x, y) > 0", [&] {
    double worst = 1e300;
    for (int i = -4; i <= 4; ++i) {
      for (int j = 1; j <= 4; ++j) {
        const double x = 1.1 * i, y = 1.1 * j;
        const Point2 g = vf.gradient(1.0, x, y);
        worst = std::min(worst, x * g.x + y * g.y);
      }
    }
    return Outcome{worst, 0.0, 0.0, worst > 0.0, "minimum radial derivative"};
  });
  s.run("value", "rotational_monotonicity", "(-y, x) . grad J(1, x, y) >= -1e-9 for x, y > 0", [&] {
    double worst = 0.0;
    for (int i = 1; i <= 4; ++i) {
      for (int j = 1; j <= 4; ++j) {
        const double x = 1.1 * i, y = 1.1 * j;
        const Point2 g = vf.gradient(1.0, x, y);
        worst = std::max(worst, -(-y * g.x + x * g.y));
      }
    }
    return deviation(worst, 1e-9);
  });
}

void front_suite(Suite& s, const ModelParams& P) {
  const FrontGeometry fg(P);
  const double c_road = fg.road_speed();
  const double theta_star = fg.critical_angle();

  s.run("front", "road_speed_agreement", "min H_r(q)/q equals the positive zero of L_r", [&] {
    const RoadSpeedReport r = road_speed_report(P);
    return deviation(std::abs(r.by_min_ratio - r.by_lagrangian), 1e-7,
                     "road speed " + fmt(r.by_min_ratio));
  });
  s.run("front", "threshold", "road speed = 2 iff D <= 2", [&] {
    double worst = 0.0;
    for (double D : {1.2, 1.8, 2.0}) worst = std::max(worst, std::abs(road_speed(P.with_D(D)) - 2.0));
    bool above = true;
    for (double D : {2.05, 3.0, 9.0}) above = above && road_speed(P.with_D(D)) > 2.0 + 1e-4;
    Outcome o = deviation(worst, 1e-7);
    o.passed = o.passed && above;
    if (!above) o.detail = "road speed not above 2 for some D > 2";
    return o;
  });
  s.run("front", "bounds", "2 sqrt(D)/(2 + mu) <= road speed <= D/sqrt(D - 1)", [&] {
    double worst = 0.0;
    for (double D : {2.1, 3.0, 5.0, 9.0, 25.0, 100.0}) {
      for (double mu : {0.1, 1.0, 10.0}) {
        ModelParams q = P.with_D(D);
        q.mu = mu;
        const double c = road_speed(q);
        worst = std::max(worst, 2.0 * std::sqrt(D) / (2.0 + mu) - c);
        worst = std::max(worst, c - D / std::sqrt(D - 1.0));
      }
    }
    return deviation(worst, 1e-9, "largest bound violation");
  });
  s.run("front", "monotone_in_D", "road speed nondecreasing in D", [&] {
    double worst = 0.0, prev = 0.0;
    for (double D : {1.5, 2.0, 2.5, 3.0, 5.0, 9.0, 20.0, 50.0}) {
      const double c = road_speed(P.with_D(D));
      worst = std::max(worst, prev - c);
      prev = c;
    }
    return deviation(worst, 1e-9);
  });
  s.run("front", "lower_shape_inclusion", "lower shape lies inside W", [&] {
    double worst = 0.0;
    for (int k = 0; k <= 16; ++k) {
      const double th = kHalfPi * k / 16.0;
      worst = std::max(worst, fg.lower_shape_speed(th) - fg.directional_speed(th));
    }
    Outcome o = deviation(worst, 1e-6);
    if (P.D > 2.0) {
      const double lv = fg.lower_shape_angle();
      const bool strict = fg.directional_speed(lv) > fg.lower_shape_speed(lv) + 1e-9;
      o.passed = o.passed && strict;
      o.detail = strict ? "strict at the lower-shape angle" : "not strict at the lower-shape angle";
    }
    return o;
  });
  s.run("front", "upper_envelope", "c(theta) <= 2/cos(theta - theta_*) on [theta_*, pi/2]", [&] {
    double worst = 0.0;
    for (int k = 0; k <= 16; ++k) {
      const double th = theta_star + (kHalfPi - theta_star) * k / 16.0;
      worst = std::max(worst, fg.directional_speed(th) - 2.0 / std::cos(th - theta_star));
    }
    return deviation(worst, 1e-4);
  });
  s.run("front", "theta_star_bounds", "theta_* bounds for D in {3, 9, 25, 100}, mu in {0.5, 1, 5}", [&] {
    int bad = 0;
    std::string detail;
    for (double D : {3.0, 9.0, 25.0, 100.0}) {
      for (double mu : {0.5, 1.0, 5.0}) {
        ModelParams q = P.with_D(D);
        q.mu = mu;
        const double th = critical_angle(q);
        if (!(th >= theta_star_lower(q) && th < theta_star_upper(q))) {
          ++bad;
          detail += " D=" + fmt(D) + ",mu=" + fmt(mu);
        }
      }
    }
    return Outcome{static_cast<double>(bad), 0.0, 0.0, bad == 0, detail};
  });
  s.run("front", "theta_star_semi_analytic", "theta_* matches the root of sin(theta) = g(cos(theta))", [&] {
    const double ref = semi_analytic_theta_star(P);
    return Outcome{theta_star, ref, 5e-3, std::abs(theta_star - ref) <= 5e-3,
                   "indicator threshold 1e-6 biases theta_* upward"};
  });
  s.run("front", "plateau", "c = 2 below theta_*, c > 2 above", [&] {
    bool ok = true;
    if (theta_star > 1e-6) ok = std::abs(fg.directional_speed(theta_star - 1e-6) - 2.0) <= 1e-6;
    if (theta_star < kHalfPi - 1e-6) ok = ok && fg.directional_speed(theta_star + 1e-6) > 2.0;
    return flag(ok);
  });
  s.run("front", "strict_increase", "c strictly increasing beyond theta_*", [&] {
    if (P.D <= 2.0) return flag(true, "D <= 2: plateau everywhere");
    double worst = 1e300;
    double prev = fg.directional_speed(theta_star + 1e-3);
    for (int k = 1; k <= 12; ++k) {
      const double th = theta_star + 1e-3 + (kHalfPi - theta_star - 1e-3) * k / 12.0;
      const double c = fg.directional_speed(th);
      worst = std::min(worst, c - prev);
      prev = c;
    }
    return Outcome{worst, 0.0, 0.0, worst > 0.0, "smallest forward difference"};
  });
  s.run("front", "field_height", "c(theta) cos(theta) <= 2", [&] {
    double worst = 0.0;
    for (int k = 0; k <= 32; ++k) {
      const double th = kHalfPi * k / 32.0;
      worst = std::max(worst, fg.directional_speed(th) * std::cos(th) - 2.0);
    }
    return deviation(worst, 1e-6);
  });
  s.run("front", "no_huygens", "boundary paths ride the road faster than c(pi/2), cross the field slower than 2",
        [&] {
          if (P.D <= 2.0) return flag(true, "D <= 2: no road-enhanced directions");
          double margin = 1e300;
          for (int k = 1; k <= 3; ++k) {
            const double th = theta_star + (kHalfPi - theta_star) * k / 4.0;
            const double c = fg.directional_speed(th);
            const LaxOleinikSolution sol = fg.value_function().solve(1.0, c * std::sin(th), c * std::cos(th));
            const double field = std::hypot(sol.field_velocity.x, sol.field_velocity.y);
            margin = std::min({margin, sol.on_road_speed - c_road - 1e-4, 2.0 - 1e-4 - field});
          }
          return Outcome{margin, 0.0, 0.0, margin > 0.0, "smallest margin"};
        });
  s.run("front", "convexity", "sampled W (n = 64) is convex", [&] {
    const WulffShape w = fg.sample_wulff(64);
    const bool ok = w.convex && convexity_check(w) && !w.theta_star_violation;
    return flag(ok, w.theta_star_violation ? "theta_* not below the lower-shape angle" : "");
  });
}

void cone_suite(Suite& s, const ModelParams& P) {
  const FrontGeometry fg(P);
  s.run("cone", "involution", "reflection is an involution swapping the roads", [&] {
    double worst = 0.0;
    for (double a : {kPi / 8.0, kPi / 6.0, kPi / 4.0, 5.0 * kPi / 12.0, kHalfPi}) {
      const ConeGeometry c(a);
      for (const auto& [x, y] : {std::pair{1.0, 0.0}, std::pair{0.3, 2.0}, std::pair{-1.5, 0.7}}) {
        const Point2 r = c.reflect(x, y);
        const Point2 rr = c.reflect(r.x, r.y);
        worst = std::max(worst, std::hypot(rr.x - x, rr.y - y));
      }
      const Point2 e = c.reflect(1.0, 0.0);
      worst = std::max(worst, std::hypot(e.x - std::cos(2.0 * a), e.y - std::sin(2.0 * a)));
    }
    return deviation(worst, 1e-14);
  });
  s.run("cone", "min_formula", "c_{*a} equals the zero of J_a along each ray", [&] {
    double worst = 0.0;
    for (double a : {kPi / 6.0, kPi / 3.0}) {
      const ConeGeometry cone(a);
      for (int k = 0; k <= 4; ++k) {
        const double th = cone.far_road_theta() + 2.0 * a * k / 4.0;
        const double predicted = cone_speed(th, cone, fg);
        auto f = [&](double r) {
          return solve_Ja(1.0, r * std::sin(th), std::max(0.0, r * std::cos(th)), cone, P);
        };
        const double root = numerics::brent_root(f, 1.0, std::max(4.0, 2.0 * fg.road_speed()), 1e-11);
        worst = std::max(worst, std::abs(root - predicted));
      }
    }
    return deviation(worst, 1e-6);
  });
  s.run("cone", "distance_bound", "W_a boundary within distance 2 of the roads", [&] {
    double worst = 0.0;
    for (double a : {kPi / 8.0, kPi / 4.0, 5.0 * kPi / 12.0}) {
      const ConeWulffShape w = cone_wulff(ConeGeometry(a), P, 24);
      for (const auto& smp : w.samples) worst = std::max(worst, distance_to_roads(smp.x(), smp.y(), a) - 2.0);
    }
    return deviation(worst, 1e-6);
  });
  s.run("cone", "trichotomy", "cone speeds: all 2 (D <= 2), all > 2 (narrow), 2 on the middle arc (wide)", [&] {
    double worst = 0.0;
    const ModelParams low = P.with_D(1.5);
    const ConeGeometry mid(kPi / 3.0);
    const FrontGeometry fl(low);
    for (int k = 0; k <= 4; ++k) {
      const double th = mid.far_road_theta() + 2.0 * mid.a() * k / 4.0;
      worst = std::max(worst, std::abs(cone_speed(th, mid, fl) - 2.0));
    }
    if (P.D > 2.0) {
      const double ts = fg.critical_angle();
      const double narrow_a = std::min(kPi / 8.0, 0.5 * (kHalfPi - ts));
      const ConeGeometry narrow(narrow_a);
      for (int k = 0; k <= 4; ++k) {
        const double th = narrow.far_road_theta() + 2.0 * narrow_a * k / 4.0;
        worst = std::max(worst, 2.0 + 1e-4 - cone_speed(th, narrow, fg));
      }
      const double wide_a = 0.5 * (kHalfPi + (kHalfPi - ts));
      const ConeGeometry wide(wide_a);
      const double lo = kPi - 2.0 * wide_a - ts, hi = ts;
      for (int k = 0; k <= 4; ++k) {
        const double th = lo + 1e-3 + (hi - lo - 2e-3) * k / 4.0;
        worst = std::max(worst, std::abs(cone_speed(th, wide, fg) - 2.0));
      }
    }
    return deviation(worst, 1e-4);
  });
  s.run("cone", "nonconvex_monotone_in_D", "nonconvex at D0 implies nonconvex at 2 D0", [&] {
    bool ok = true;
    for (double a : {kPi / 8.0, kPi / 6.0}) {
      const ConeGeometry cone(a);
      const double Da = convexity_threshold_D(cone, P);
      for (double D0 : {Da * 1.05, Da * 2.0, Da * 4.0}) {
        if (!cone_convex(cone, P.with_D(D0))) ok = ok && !cone_convex(cone, P.with_D(2.0 * D0));
      }
    }
    return flag(ok);
  });
  s.run("cone", "supporting_line_agreement", "angle criterion and supporting-line test agree", [&] {
    bool ok = true;
    for (double a : {kPi / 8.0, kPi / 4.0, 5.0 * kPi / 12.0}) {
      ok = ok && cone_wulff(ConeGeometry(a), P, 24).consistent();
    }
    return flag(ok);
  });
  s.run("cone", "unequal_bounds", "degenerate and fast-road cases of the unequal-diffusion bounds", [&] {
    double worst = 0.0;
    const ConeGeometry c6(kPi / 6.0);
    ModelParams eq = P;
    eq.D_tilde = P.D;
    for (double th : {kHalfPi, c6.bisector_theta(), c6.far_road_theta()}) {
      const SpeedBounds b = unequal_diffusion_speed_bounds(th, c6, eq);
      const double c = cone_speed(th, c6, fg);
      worst = std::max({worst, std::abs(b.lower - c), std::abs(b.upper - c)});
    }
    ModelParams fast = P.with_D(4.0);
    fast.D_tilde = 16.0;
    const SpeedBounds b = unequal_diffusion_speed_bounds(c6.far_road_theta(), c6, fast);
    const double ref = road_speed(P.with_D(16.0));
    worst = std::max({worst, std::abs(b.lower - ref), std::abs(b.upper - ref)});
    return deviation(worst, 1e-6);
  });
}

void simulator_suite(Suite& s, const ModelParams& P) {
  s.run("simulator", "equilibria", "uniform states (1, nu/mu) and (0, 0) are fixed points", [&] {
    RDState st = init_state(P, 10.0, 10.0, 0.4, 1.0);
    st.guard = false;
    std::fill(st.V.begin(), st.V.end(), 1.0);
    std::fill(st.U.begin(), st.U.end(), P.nu / P.mu);
    RDState zero = st;
    std::fill(zero.V.begin(), zero.V.end(), 0.0);
    std::fill(zero.U.begin(), zero.U.end(), 0.0);
    for (int k = 0; k < 10; ++k) {
      step(st);
      step(zero);
    }
    double worst = 0.0;
    for (double v : st.V) worst = std::max(worst, std::abs(v - 1.0));
    for (double u : st.U) worst = std::max(worst, std::abs(u - P.nu / P.mu));
    for (double v : zero.V) worst = std::max(worst, std::abs(v));
    for (double u : zero.U) worst = std::max(worst, std::abs(u));
    return deviation(worst, 1e-14);
  });
  s.run("simulator", "comparison_bounds", "0 <= V <= 1 and 0 <= U <= nu/mu over a short run", [&] {
    SimulationConfig c;
    c.h = 0.4;
    c.Lx = 40.0;
    c.Ly = 30.0;
    c.t_max = 8.0;
    c.r0 = 1.0;
    c.thetas = {0.0, kHalfPi};
    const SimulationResult r = run_simulation(P, c);
    std::ostringstream d;
    d << "V in [" << r.min_V << ", " << r.max_V << "], U in [" << r.min_U << ", " << r.max_U << "]";
    return flag(r.bounds_respected, d.str());
  });
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::size_t VerifyReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
}

std::vector<std::string> VerifyReport::failed_names() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.passed) out.push_back(c.name);
  }
  return out;
}

std::string format_check(const CheckResult& c) {
  std::ostringstream os;
  os << (c.passed ? "PASS " : "FAIL ") << c.name << ": measured=" << fmt(c.measured)
     << " reference=" << fmt(c.reference) << " tol=" << fmt(c.tolerance) << " (" << fmt(c.seconds)
     << " s";
  if (c.time_limit > 0.0) os << " / " << fmt(c.time_limit) << " s";
  os << ")";
  if (!c.detail.empty()) os << " [" << c.detail << "]";
  return os.str();
}

VerifyReport run_verify(const VerifyOptions& options) {
  options.params.validate();
  Suite s;
  hamiltonian_suite(s, options.params);
  legendre_suite(s, options.params, options);
  value_suite(s, options.params, options.quick);
  front_suite(s, options.params);
  cone_suite(s, options.params);
  if (!options.quick) simulator_suite(s, options.params);
  VerifyReport report{s.take()};
  if (options.acceptance) {
    AcceptanceOptions ao;
    ao.skip_simulation = options.quick;
    for (auto& c : acceptance_battery(ao)) report.checks.push_back(std::move(c));
  }
  return report;
}

std::vector<CheckResult> acceptance_battery(const AcceptanceOptions& options) {
  Suite s(options.print);
  const ModelParams base;  // D = 9, mu = nu = kappa = 1

  s.run("acceptance", "1_headline_speed", "road speed at D = 9, mu = nu = kappa = 1 equals 3.1243", [&] {
    const double c = road_speed(base);
    return Outcome{c, 3.1243, 5e-4, std::abs(c - 3.1243) <= 5e-4, ""};
  }, 1.0);

  s.run("acceptance", "2_threshold", "road speed = 2 for D <= 2 and > 2.0001 above", [&] {
    double worst = 0.0;
    for (double D : {1.2, 1.8, 2.0}) worst = std::max(worst, std::abs(road_speed(base.with_D(D)) - 2.0));
    double least_excess = 1e300;
    for (double D : {2.05, 3.0, 9.0}) least_excess = std::min(least_excess, road_speed(base.with_D(D)) - 2.0001);
    Outcome o = deviation(worst, 1e-7, "smallest excess over 2.0001: " + fmt(least_excess));
    o.passed = o.passed && least_excess > 0.0;
    return o;
  }, 1.0);

  s.run("acceptance", "3_bounds_sweep", "2 sqrt(D)/(2 + mu) <= road speed <= D/sqrt(D - 1)", [&] {
    double worst = -1e300;
    for (double D : {2.1, 3.0, 5.0, 9.0, 25.0, 100.0}) {
      for (double mu : {0.1, 1.0, 10.0}) {
        ModelParams q = base.with_D(D);
        q.mu = mu;
        const double c = road_speed(q);
        worst = std::max({worst, 2.0 * std::sqrt(D) / (2.0 + mu) - c, c - D / std::sqrt(D - 1.0)});
      }
    }
    return Outcome{worst, 0.0, 0.0, worst <= 0.0, "largest signed bound violation"};
  }, 5.0);

  s.run("acceptance", "4_large_D", "road_speed(1e6)/1e3 matches the large-D asymptote", [&] {
    const double ratio = road_speed(base.with_D(1e6)) / 1e3;
    const double asym = large_D_asymptote(base);
    return Outcome{ratio, asym, 2e-3, std::abs(ratio - asym) <= 2e-3, ""};
  }, 5.0);

  s.run("acceptance", "5_lax_oleinik_oracle", "|J - 801 x 801 grid oracle| <= 5e-3, 20 points per D", [&] {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), uy(0.0, 5.0);
    double worst = 0.0;
    for (double D : {1.5, 3.0, 9.0}) {
      const ValueFunction vf(base.with_D(D));
      for (int k = 0; k < 20; ++k) {
        const double x = ux(rng), y = uy(rng);
        worst = std::max(worst, std::abs(vf.value(1.0, x, y) - vf.oracle(1.0, x, y, 801, 801)));
      }
    }
    return deviation(worst, 5e-3);
  }, 60.0);

  s.run("acceptance", "6_duality_battery", "Fenchel, double conjugation, window, flux identity", [&] {
    Suite inner;
    hamiltonian_suite(inner, base);
    VerifyOptions vo;
    legendre_suite(inner, base, vo);
    std::string failed;
    for (const auto& c : inner.take()) {
      const bool relevant = c.name == "legendre.fenchel_identity" || c.name == "legendre.double_conjugation" ||
                            c.name == "legendre.quadratic_window" || c.name == "hamiltonians.flux_identity";
      if (relevant && !c.passed) failed += " " + c.name;
    }
    return flag(failed.empty(), failed.empty() ? "" : "failed:" + failed);
  }, 10.0);

  s.run("acceptance", "7_wulff_geometry", "convexity, theta_* bounds, upper envelope at D = 9", [&] {
    const FrontGeometry fg(base);
    const WulffShape w = fg.sample_wulff(64);
    const double ts = w.theta_star;
    const bool convex = w.convex && convexity_check(w);
    const bool in_bounds = ts >= theta_star_lower(base) && ts < theta_star_upper(base) &&
                           ts < std::asin(2.0 / w.road_speed);
    double worst = 0.0;
    for (const auto& smp : w.samples) {
      if (smp.theta >= ts) worst = std::max(worst, smp.speed - 2.0 / std::cos(smp.theta - ts));
    }
    const bool envelope = worst <= 1e-4;
    std::string d = "theta_*=" + fmt(ts);
    if (!convex) d += "; not convex";
    if (!in_bounds) d += "; theta_* outside bounds";
    if (!envelope) d += "; envelope violated";
    return Outcome{ts, 0.0, 0.0, convex && in_bounds && envelope, d};
  }, 30.0);

  s.run("acceptance", "8_cone_regimes", "road speeds on both roads, nonconvexity, distance bound", [&] {
    const FrontGeometry fg(base);
    const double c = fg.road_speed();
    double worst = 0.0, dist = 0.0;
    for (double a : {5.0 * kPi / 12.0, kPi / 4.0, kPi / 8.0}) {
      const ConeGeometry cone(a);
      worst = std::max(worst, std::abs(cone_speed(kHalfPi, cone, fg) - c));
      worst = std::max(worst, std::abs(cone_speed(cone.far_road_theta(), cone, fg) - c));
      const ConeWulffShape w = cone_wulff(cone, base, 32);
      for (const auto& smp : w.samples) dist = std::max(dist, distance_to_roads(smp.x(), smp.y(), a) - 2.0);
    }
    const ConeGeometry eighth(kPi / 8.0);
    const ConeWulffShape w8 = cone_wulff(eighth, base, 32);
    const bool nonconvex8 = !w8.convex && !w8.supporting_line_convex;
    bool bound_nonconvex = true;
    for (double a : {kPi / 8.0, kPi / 6.0, kPi / 5.0}) {
      const ConeGeometry cone(a);
      const double s2 = std::sin(2.0 * a);
      const double Dbound = 4.0 * (2.0 + base.mu) * (2.0 + base.mu) / (s2 * s2);
      for (double D : {Dbound, 1.5 * Dbound, 3.0 * Dbound}) {
        bound_nonconvex = bound_nonconvex && !cone_convex(cone, base.with_D(D));
      }
    }
    std::string d = "max road-speed deviation " + fmt(worst) + ", max distance excess " + fmt(dist);
    if (!nonconvex8) d += "; a = pi/8 not flagged nonconvex";
    if (!bound_nonconvex) d += "; convex above the D bound";
    return Outcome{worst, 0.0, 5e-4, worst <= 5e-4 && dist <= 1e-6 && nonconvex8 && bound_nonconvex, d};
  }, 60.0);

  s.run("acceptance", "9_freidlin_paths", "boundary paths: J >= 0 along the way, fast road, slow field", [&] {
    const FrontGeometry fg(base);
    const double ts = fg.critical_angle();
    const double c_road = fg.road_speed();
    const ValueFunction& vf = fg.value_function();
    double min_J = 1e300;
    bool fast_road = true, slow_field = true;
    for (int k = 1; k <= 5; ++k) {
      const double th = ts + (kHalfPi - ts) * k / 6.0;
      const double c = fg.directional_speed(th);
      const LaxOleinikSolution sol = vf.solve(1.0, c * std::sin(th), c * std::cos(th));
      for (const auto& ps : ValueFunction::path_of(sol, 41)) {
        if (ps.s <= 0.0 || ps.s >= 1.0) continue;
        min_J = std::min(min_J, vf.value(ps.s, ps.position.x, std::max(0.0, ps.position.y)));
      }
      fast_road = fast_road && sol.on_road_speed > c_road;
      slow_field = slow_field && std::hypot(sol.field_velocity.x, sol.field_velocity.y) < 2.0;
    }
    std::string d;
    if (!fast_road) d += "on-road speed not above road speed; ";
    if (!slow_field) d += "field speed not below 2";
    return Outcome{min_J, -1e-5, 0.0, min_J >= -1e-5 && fast_road && slow_field, d};
  }, 10.0);

  if (!options.skip_simulation) {
    s.run("acceptance", "10_pde_cross_validation",
          "simulated speeds within 10% of c(theta), theta in {0, pi/2}, D in {1.5, 9}", [&] {
            double worst = 0.0;
            bool bounds = true;
            std::ostringstream d;
            for (double D : {1.5, 9.0}) {
              const ModelParams q = base.with_D(D);
              const FrontGeometry fg(q);
              SimulationConfig cfg;
              cfg.h = 0.2;
              cfg.t_max = 40.0;
              cfg.Lx = D > 2.0 ? 160.0 : 100.0;
              cfg.Ly = 100.0;
              cfg.thetas = {0.0, kHalfPi};
              const SimulationResult r = run_simulation(q, cfg);
              bounds = bounds && r.bounds_respected;
              for (std::size_t k = 0; k < cfg.thetas.size(); ++k) {
                const double pred = fg.directional_speed(cfg.thetas[k]);
                const double rel = std::abs(r.speeds[k].speed - pred) / pred;
                worst = std::max(worst, rel);
                d << "D=" << D << " theta=" << fmt(cfg.thetas[k]) << ": " << fmt(r.speeds[k].speed) << " vs "
                  << fmt(pred) << "; ";
              }
            }
            if (!bounds) d << "maximum-principle bounds violated";
            return Outcome{worst, 0.0, 0.1, worst <= 0.1 && bounds, d.str()};
          }, 600.0);
  }
  return s.take();
}

}  // namespace roadfield
