#pragma once

#include <utility>
#include <vector>

#include "roadfield/legendre.hpp"

namespace roadfield {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Value of the control problem at (t, x, y) with the data of its unique
/// minimizing path: travel along the road for time tau0 up to abscissa z0
/// (measured on the side of x), then straight through the field with
/// velocity (2 q0, 2 p0).
struct LaxOleinikSolution {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
  double tau0 = 0.0;
  double z0 = 0.0;
  double q0 = 0.0;  ///< |x-momentum|; the signed gradient is q0 * sign(x)
  double p0 = 0.0;
  double on_road_speed = 0.0;  ///< z0 / tau0, zero when tau0 == 0
  Point2 field_velocity;       ///< (2 q0, 2 p0)
};

struct PathSample {
  double s;
  Point2 position;
};

/// Value function J of the road-field control problem, evaluated through its
/// two-segment (road, then field) reduction and the scaling
/// J(t, x, y) = t J(1, x/t, y/t).
///
/// The rescaled objective
///
///   Phi(tau, z) = (1 - tau) L_f((x - z)/(1 - tau), y/(1 - tau)) + tau L_r(z/tau)
///
/// is jointly convex on [0, 1] x [0, x]. It is minimized by nested Brent
/// searches (z inside, tau outside) and then polished with the first-order
/// conditions. At tau = 0 only z = 0 is admissible; at tau = 1 only the pure
/// road path z = x, y = 0.
class ValueFunction {
 public:
  explicit ValueFunction(const ModelParams& params);
  explicit ValueFunction(RoadLagrangian lagrangian);

  [[nodiscard]] const RoadLagrangian& road() const { return road_; }
  [[nodiscard]] const ModelParams& params() const { return road_.params(); }

  /// Throws InvalidConfig if t <= 0 or y < 0.
  [[nodiscard]] LaxOleinikSolution solve(double t, double x, double y) const;
  [[nodiscard]] double value(double t, double x, double y) const { return solve(t, x, y).value; }

  /// Exhaustive minimization of Phi over an n_tau x n_z uniform grid.
  /// Independent check on solve(); throws InvalidConfig for grid counts < 2.
  [[nodiscard]] double oracle(double t, double x, double y, int n_tau, int n_z) const;

  [[nodiscard]] std::vector<PathSample> optimal_path(double t, double x, double y,
                                                     int n_samples) const;
  [[nodiscard]] static std::vector<PathSample> path_of(const LaxOleinikSolution& sol,
                                                       int n_samples);

  /// Spatial gradient (q0 sign(x), p0) for y > 0; throws on the road.
  [[nodiscard]] Point2 gradient(double t, double x, double y) const;

  /// max(0, J).
  [[nodiscard]] double w(double t, double x, double y) const;

  /// Objective Phi at (tau, z) for the rescaled endpoint (xh, yh), xh >= 0.
  /// Returns +inf at inadmissible boundary points.
  [[nodiscard]] double objective(double xh, double yh, double tau, double z) const;

 private:
  [[nodiscard]] LaxOleinikSolution solve_unit(double xh, double yh) const;
  RoadLagrangian road_;
};

// Free-function forms.
LaxOleinikSolution solve_J(double t, double x, double y, const ModelParams& params);
double solve_J_oracle(double t, double x, double y, const ModelParams& params, int n_tau, int n_z);
std::vector<PathSample> optimal_path(double t, double x, double y, const ModelParams& params,
                                     int n_samples);
Point2 grad_J(double t, double x, double y, const ModelParams& params);
double eval_w(double t, double x, double y, const ModelParams& params);

}  // namespace roadfield
