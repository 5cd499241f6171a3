#pragma once

#include "roadfield/params.hpp"

namespace roadfield {

/// A real number or a distinguished +infinity. The boundary Hamiltonian
/// takes the value +infinity on a half-line of momenta; this keeps that case
/// separate from floating-point overflow.
class ExtendedReal {
 public:
  static ExtendedReal finite(double v) { return ExtendedReal(v, false); }
  static ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  [[nodiscard]] bool is_infinite() const { return infinite_; }
  /// Finite value; throws std::logic_error when infinite.
  [[nodiscard]] double value() const;

 private:
  ExtendedReal(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

/// Field Hamiltonian q^2 + p^2 + 1.
double eval_Hf(double q, double p);

/// Nonincreasing-in-p part of the field Hamiltonian, max(p, 0)^2 + q^2 + 1.
double eval_Hf_minus(double q, double p);

/// Exchange term of the boundary Hamiltonian: -mu p / (kappa nu + p), or +inf
/// for p <= -kappa nu.
ExtendedReal eval_B0(double p, const ModelParams& params);

/// Boundary Hamiltonian D q^2 + B0(p).
ExtendedReal eval_F0(double q, double p, const ModelParams& params);

/// Effective road Hamiltonian H_r(q) = q^2 + p_q^2 + 1, where p_q is the
/// critical momentum at which the field and boundary Hamiltonians cross.
///
/// p_q vanishes for q^2 <= 1/(D-1); beyond that threshold it is the inverse of
/// the increasing map
///
///   g(p) = sqrt( (p^2 + 1 + mu p / (kappa nu + p)) / (D - 1) ),
///
/// found by bisection. Negative q is handled by evenness. Immutable after
/// construction.
class EffectiveRoadHamiltonian {
 public:
  static constexpr double kDefaultTolerance = 1e-12;

  explicit EffectiveRoadHamiltonian(const ModelParams& params,
                                    double pq_solver_tolerance = kDefaultTolerance);

  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] double q_crit() const { return q_crit_; }
  [[nodiscard]] double tolerance() const { return tol_; }

  /// g(p) for p >= 0; throws InvalidConfig for negative p.
  [[nodiscard]] double g(double p) const;
  /// First and second derivatives of g on p >= 0.
  [[nodiscard]] double g_prime(double p) const;
  [[nodiscard]] double g_second(double p) const;

  [[nodiscard]] double solve_pq(double q) const;
  [[nodiscard]] double eval(double q) const;
  [[nodiscard]] double derivative(double q) const;

  /// Road-direction slope H_r'(g(p)) = 2 g(p) + 2 p / g'(p), parametrized by
  /// the critical momentum p >= 0. Monotone in p.
  [[nodiscard]] double slope_at_pq(double p) const;
  /// d/dp of slope_at_pq.
  [[nodiscard]] double slope_at_pq_derivative(double p) const;

  /// Flux-limited boundary Hamiltonian max(H_f^-(q, p), H_r(q)).
  [[nodiscard]] double eval_F(double q, double p) const;

 private:
  [[nodiscard]] double exchange(double p) const;  // mu p / (kappa nu + p)
  ModelParams params_;
  double tol_;
  double q_crit_;
  double kn_;
};

// Convenience wrappers over a temporary evaluator.
double eval_g(double p, const ModelParams& params);
double solve_pq(double q, const ModelParams& params);
double eval_Hr(double q, const ModelParams& params);
double eval_Hr_prime(double q, const ModelParams& params);
double eval_F(double q, double p, const ModelParams& params);

}  // namespace roadfield
