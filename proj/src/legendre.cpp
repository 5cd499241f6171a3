#include "roadfield/legendre.hpp"

#include <cmath>

namespace roadfield {

double eval_Lf(double v1, double v2) { return 0.25 * (v1 * v1 + v2 * v2) - 1.0; }

RoadLagrangian::RoadLagrangian(const ModelParams& params, double conjugate_tolerance)
    : RoadLagrangian(EffectiveRoadHamiltonian(params), conjugate_tolerance) {}

RoadLagrangian::RoadLagrangian(EffectiveRoadHamiltonian hamiltonian, double conjugate_tolerance)
    : hamiltonian_(std::move(hamiltonian)), tol_(conjugate_tolerance) {
  if (!(tol_ > 0.0)) throw InvalidConfig("conjugate tolerance must be positive");
}

ConjugatePoint RoadLagrangian::conjugate(double v) const {
  const double av = std::fabs(v);
  const double sign = v < 0.0 ? -1.0 : 1.0;
  if (av <= window()) {
    return {sign * 0.5 * av, 0.0, 0.25 * av * av - 1.0};
  }

  const auto& h = hamiltonian_;
  // slope_at_pq(p) >= 2 g(p) >= 2 p / sqrt(D-1), so this bracket holds the root.
  double lo = 0.0;
  double hi = 0.5 * av * std::sqrt(h.params().D - 1.0) + 1.0;
  double p = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double r = h.slope_at_pq(p) - av;
    if (r > 0.0) {
      hi = p;
    } else {
      lo = p;
    }
    const double dr = h.slope_at_pq_derivative(p);
    double next = p - r / dr;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - p);
    p = next;
    if (step <= tol_ * (1.0 + p) || hi - lo <= tol_ * (1.0 + p)) break;
  }
  const double q = h.g(p);
  const double value = av * q - (q * q + p * p + 1.0);
  return {sign * q, p, value};
}

double eval_Lr(double v, const ModelParams& params) { return RoadLagrangian(params).eval(v); }
double eval_Lr_prime(double v, const ModelParams& params) {
  return RoadLagrangian(params).derivative(v);
}

}  // namespace roadfield
