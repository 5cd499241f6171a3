#pragma once

#include "roadfield/hamiltonians.hpp"

namespace roadfield {

/// Field Lagrangian |v|^2 / 4 - 1, the convex conjugate of q^2 + p^2 + 1.
double eval_Lf(double v1, double v2);

/// The maximizer of v q - H_r(q) together with the attained value.
struct ConjugatePoint {
  double q;      ///< conjugate momentum, L_r'(v)
  double p;      ///< critical momentum p_q at that q
  double value;  ///< L_r(v)
};

/// Road Lagrangian L_r(v) = sup_q [v q - H_r(q)].
///
/// Strict convexity of H_r makes the first-order condition v = H_r'(q)
/// exact. Inside the window |v| <= 2/sqrt(D-1) the answer is closed form
/// (q = v/2). Outside it, q lies beyond q_crit and is parametrized by its
/// critical momentum p, q = g(p); the scalar equation H_r'(g(p)) = |v| is
/// monotone in p and is solved by safeguarded Newton iteration.
class RoadLagrangian {
 public:
  static constexpr double kDefaultTolerance = 1e-13;

  explicit RoadLagrangian(const ModelParams& params, double conjugate_tolerance = kDefaultTolerance);
  explicit RoadLagrangian(EffectiveRoadHamiltonian hamiltonian,
                          double conjugate_tolerance = kDefaultTolerance);

  [[nodiscard]] const EffectiveRoadHamiltonian& hamiltonian() const { return hamiltonian_; }
  [[nodiscard]] const ModelParams& params() const { return hamiltonian_.params(); }

  [[nodiscard]] ConjugatePoint conjugate(double v) const;
  [[nodiscard]] double eval(double v) const { return conjugate(v).value; }
  [[nodiscard]] double derivative(double v) const { return conjugate(v).q; }

  /// Edge of the quadratic window, 2/sqrt(D-1).
  [[nodiscard]] double window() const { return 2.0 * hamiltonian_.q_crit(); }

 private:
  EffectiveRoadHamiltonian hamiltonian_;
  double tol_;
};

double eval_Lr(double v, const ModelParams& params);
double eval_Lr_prime(double v, const ModelParams& params);

}  // namespace roadfield
