#include "roadfield/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "roadfield/numerics.hpp"

namespace roadfield {

double ExtendedReal::value() const {
  if (infinite_) throw std::logic_error("ExtendedReal: value() on +infinity");
  return value_;
}

double eval_Hf(double q, double p) { return q * q + p * p + 1.0; }

double eval_Hf_minus(double q, double p) {
  const double pp = std::max(p, 0.0);
  return pp * pp + q * q + 1.0;
}

ExtendedReal eval_B0(double p, const ModelParams& params) {
  const double kn = params.kappa * params.nu;
  if (p <= -kn) return ExtendedReal::infinity();
  return ExtendedReal::finite(-params.mu * p / (kn + p));
}

ExtendedReal eval_F0(double q, double p, const ModelParams& params) {
  const ExtendedReal b = eval_B0(p, params);
  if (b.is_infinite()) return b;
  return ExtendedReal::finite(params.D * q * q + b.value());
}

EffectiveRoadHamiltonian::EffectiveRoadHamiltonian(const ModelParams& params,
                                                   double pq_solver_tolerance)
    : params_(params), tol_(pq_solver_tolerance) {
  params_.validate();
  if (!(tol_ > 0.0)) throw InvalidConfig("pq solver tolerance must be positive");
  q_crit_ = 1.0 / std::sqrt(params_.D - 1.0);
  kn_ = params_.kappa * params_.nu;
}

double EffectiveRoadHamiltonian::exchange(double p) const { return params_.mu * p / (kn_ + p); }

double EffectiveRoadHamiltonian::g(double p) const {
  if (p < 0.0) throw InvalidConfig("g is defined for p >= 0 only");
  return std::sqrt((p * p + 1.0 + exchange(p)) / (params_.D - 1.0));
}

double EffectiveRoadHamiltonian::g_prime(double p) const {
  const double s = kn_ + p;
  const double h1 = 2.0 * p + params_.mu * kn_ / (s * s);
  return h1 / (2.0 * (params_.D - 1.0) * g(p));
}

double EffectiveRoadHamiltonian::g_second(double p) const {
  const double s = kn_ + p;
  const double h2 = 2.0 - 2.0 * params_.mu * kn_ / (s * s * s);
  const double gp = g_prime(p);
  return (h2 / (2.0 * (params_.D - 1.0)) - gp * gp) / g(p);
}

double EffectiveRoadHamiltonian::solve_pq(double q) const {
  const double aq = std::fabs(q);
  if (aq * aq <= 1.0 / (params_.D - 1.0)) return 0.0;
  double hi = 1.0;
  while (g(hi) <= aq) hi *= 2.0;
  return numerics::bisect([&](double p) { return g(p) - aq; }, 0.0, hi, tol_);
}

double EffectiveRoadHamiltonian::eval(double q) const {
  const double p = solve_pq(q);
  return q * q + p * p + 1.0;
}

double EffectiveRoadHamiltonian::derivative(double q) const {
  const double aq = std::fabs(q);
  if (aq <= q_crit_) return 2.0 * q;
  // Implicit differentiation of g(p_q) = |q|: dp_q/dq = 1 / g'(p_q).
  const double p = solve_pq(aq);
  const double slope = 2.0 * aq + 2.0 * p / g_prime(p);
  return q < 0.0 ? -slope : slope;
}

double EffectiveRoadHamiltonian::slope_at_pq(double p) const {
  return 2.0 * g(p) + 2.0 * p / g_prime(p);
}

double EffectiveRoadHamiltonian::slope_at_pq_derivative(double p) const {
  const double gp = g_prime(p);
  return 2.0 * gp + 2.0 * (gp - p * g_second(p)) / (gp * gp);
}

double EffectiveRoadHamiltonian::eval_F(double q, double p) const {
  return std::max(eval_Hf_minus(q, p), eval(q));
}

double eval_g(double p, const ModelParams& params) { return EffectiveRoadHamiltonian(params).g(p); }
double solve_pq(double q, const ModelParams& params) {
  return EffectiveRoadHamiltonian(params).solve_pq(q);
}
double eval_Hr(double q, const ModelParams& params) { return EffectiveRoadHamiltonian(params).eval(q); }
double eval_Hr_prime(double q, const ModelParams& params) {
  return EffectiveRoadHamiltonian(params).derivative(q);
}
double eval_F(double q, double p, const ModelParams& params) {
  return EffectiveRoadHamiltonian(params).eval_F(q, p);
}

}  // namespace roadfield
