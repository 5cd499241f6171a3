#include "roadfield/value_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roadfield/numerics.hpp"

namespace roadfield {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Argument tolerance for the (tau, z) searches.
constexpr double kArgTol = 1e-11;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_point(double t, double y) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidConfig("time must be positive and finite");
  if (!(y >= 0.0) || !std::isfinite(y)) throw InvalidConfig("y must be nonnegative and finite");
}

}  // namespace

ValueFunction::ValueFunction(const ModelParams& params) : road_(params) {}

ValueFunction::ValueFunction(RoadLagrangian lagrangian) : road_(std::move(lagrangian)) {}

double ValueFunction::objective(double xh, double yh, double tau, double z) const {
  if (tau <= 0.0) {
    return z == 0.0 ? eval_Lf(xh, yh) : kInf;
  }
  if (tau >= 1.0) {
    return (z == xh && yh == 0.0) ? road_.eval(xh) : kInf;
  }
  const double s = 1.0 - tau;
  const double dx = xh - z;
  const double field = (dx * dx + yh * yh) / (4.0 * s) - s;
  return field + tau * road_.eval(z / tau);
}

LaxOleinikSolution ValueFunction::solve_unit(double xh, double yh) const {
  LaxOleinikSolution sol;
  sol.t = 1.0;
  sol.x = xh;
  sol.y = yh;

  if (yh == 0.0) {
    // Pure road path; also covers the origin, where L_r(0) = -1.
    const ConjugatePoint cp = road_.conjugate(xh);
    sol.value = cp.value;
    sol.tau0 = 1.0;
    sol.z0 = xh;
    sol.q0 = cp.q;
    sol.p0 = cp.p;
    sol.on_road_speed = xh;
    sol.field_velocity = {2.0 * sol.q0, 2.0 * sol.p0};
    return sol;
  }

  auto inner = [&](double tau) -> numerics::Minimum {
    if (tau <= 0.0) return {0.0, eval_Lf(xh, yh)};
    if (xh == 0.0) return {0.0, objective(xh, yh, tau, 0.0)};
    return numerics::brent_minimize([&](double z) { return objective(xh, yh, tau, z); }, 0.0, xh,
                                    kArgTol * (1.0 + xh));
  };

  const numerics::Minimum outer =
      numerics::brent_minimize([&](double tau) { return inner(tau).value; }, 0.0, 1.0, kArgTol);
  double tau = outer.x;
  double z = inner(tau).x;
  double best = outer.value;

  // Ties go to the smallest tau: the straight field path.
  const double straight = eval_Lf(xh, yh);
  if (straight <= best + 1e-14 * (1.0 + std::fabs(best))) {
    tau = 0.0;
    z = 0.0;
    best = straight;
  }

  // Polish with the first-order conditions. A field segment with momentum
  // (g(p), p) leaves the road at z = tau H_r'(g(p)) and lasts 1 - tau =
  // y/(2p); matching the endpoint abscissa gives
  //   X(p) = H_r'(g(p)) - y / g'(p) = x,   p > y/2.
  const auto& h = road_.hamiltonian();
  auto endpoint_gap = [&](double p) { return h.slope_at_pq(p) - yh / h.g_prime(p) - xh; };
  const double p_lo = 0.5 * yh;
  bool polished = false;
  if (endpoint_gap(p_lo) < 0.0) {
    double p_hi = std::max(2.0 * p_lo, 1.0);
    for (int i = 0; i < 200 && endpoint_gap(p_hi) < 0.0; ++i) p_hi *= 2.0;
    if (endpoint_gap(p_hi) > 0.0) {
      const double p = numerics::brent_root(endpoint_gap, p_lo, p_hi, 1e-15 * (1.0 + p_hi));
      const double tau_r = 1.0 - yh / (2.0 * p);
      const double z_r = std::min(xh, tau_r * h.slope_at_pq(p));
      const double val = objective(xh, yh, tau_r, z_r);
      if (tau_r > 0.0 && tau_r < 1.0 && val <= best + 1e-12 * (1.0 + std::fabs(best))) {
        tau = tau_r;
        z = z_r;
        best = val;
        sol.q0 = h.g(p);
        sol.p0 = p;
        polished = true;
      }
    }
  }

  sol.value = best;
  sol.tau0 = tau;
  sol.z0 = z;
  if (!polished) {
    if (tau == 0.0) {
      sol.q0 = 0.5 * xh;
      sol.p0 = 0.5 * yh;
    } else {
      sol.q0 = 0.5 * (xh - z) / (1.0 - tau);
      sol.p0 = 0.5 * yh / (1.0 - tau);
    }
  }
  sol.on_road_speed = tau > 0.0 ? z / tau : 0.0;
  sol.field_velocity = {2.0 * sol.q0, 2.0 * sol.p0};
  return sol;
}

LaxOleinikSolution ValueFunction::solve(double t, double x, double y) const {
  check_point(t, y);
  if (!std::isfinite(x)) throw InvalidConfig("x must be finite");
  LaxOleinikSolution sol = solve_unit(std::fabs(x) / t, y / t);
  sol.t = t;
  sol.x = x;
  sol.y = y;
  sol.value *= t;
  sol.tau0 *= t;
  sol.z0 *= t;
  return sol;
}

double ValueFunction::oracle(double t, double x, double y, int n_tau, int n_z) const {
  check_point(t, y);
  if (n_tau < 2 || n_z < 2) throw InvalidConfig("oracle grid counts must be at least 2");
  const double xh = std::fabs(x) / t;
  const double yh = y / t;
  double best = kInf;
  for (int i = 0; i < n_tau; ++i) {
    const double tau = static_cast<double>(i) / (n_tau - 1);
    for (int j = 0; j < n_z; ++j) {
      // The last column is exactly xh so the pure road path is on the grid.
      const double z = j == n_z - 1 ? xh : xh * static_cast<double>(j) / (n_z - 1);
      best = std::min(best, objective(xh, yh, tau, z));
    }
  }
  return t * best;
}

std::vector<PathSample> ValueFunction::path_of(const LaxOleinikSolution& sol, int n_samples) {
  if (n_samples < 2) throw InvalidConfig("path needs at least 2 samples");
  const double sx = sign_of(sol.x);
  std::vector<PathSample> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double s = sol.t * static_cast<double>(i) / (n_samples - 1);
    Point2 pos;
    if (s <= sol.tau0 && sol.tau0 > 0.0) {
      pos = {sx * sol.z0 * s / sol.tau0, 0.0};
    } else {
      const double ds = s - sol.tau0;
      pos = {sx * (sol.z0 + 2.0 * sol.q0 * ds), 2.0 * sol.p0 * ds};
    }
    out.push_back({s, pos});
  }
  return out;
}

std::vector<PathSample> ValueFunction::optimal_path(double t, double x, double y,
                                                    int n_samples) const {
  return path_of(solve(t, x, y), n_samples);
}

Point2 ValueFunction::gradient(double t, double x, double y) const {
  check_point(t, y);
  if (y == 0.0) throw InvalidConfig("gradient formula applies off the road only (y > 0)");
  const LaxOleinikSolution sol = solve(t, x, y);
  return {sign_of(x) * sol.q0, sol.p0};
}

double ValueFunction::w(double t, double x, double y) const {
  return std::max(0.0, solve(t, x, y).value);
}

LaxOleinikSolution solve_J(double t, double x, double y, const ModelParams& params) {
  return ValueFunction(params).solve(t, x, y);
}
double solve_J_oracle(double t, double x, double y, const ModelParams& params, int n_tau, int n_z) {
  return ValueFunction(params).oracle(t, x, y, n_tau, n_z);
}
std::vector<PathSample> optimal_path(double t, double x, double y, const ModelParams& params,
                                     int n_samples) {
  return ValueFunction(params).optimal_path(t, x, y, n_samples);
}
Point2 grad_J(double t, double x, double y, const ModelParams& params) {
  return ValueFunction(params).gradient(t, x, y);
}
double eval_w(double t, double x, double y, const ModelParams& params) {
  return ValueFunction(params).w(t, x, y);
}

}  // namespace roadfield
