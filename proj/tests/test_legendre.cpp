#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "roadfield/legendre.hpp"

using namespace roadfield;

namespace {

ModelParams base(double D) {
  ModelParams p;
  p.D = D;
  return p;
}

// Brute-force conjugate: dense grid followed by a local refinement.
ConjugatePoint grid_conjugate(double v, const EffectiveRoadHamiltonian& H) {
  double best_q = 0.0, best = -H.eval(0.0);
  for (int i = 0; i <= 20000; ++i) {
    const double q = -5.0 + 10.0 * i / 20000.0;
    const double val = v * q - H.eval(q);
    if (val > best) best = val, best_q = q;
  }
  double step = 5e-4;
  for (int round = 0; round < 40; ++round, step *= 0.5) {
    for (double q : {best_q - step, best_q + step}) {
      const double val = v * q - H.eval(q);
      if (val > best) best = val, best_q = q;
    }
  }
  return {best_q, H.solve_pq(best_q), best};
}

}  // namespace

TEST_CASE("field Lagrangian") {
  CHECK(eval_Lf(0.0, 0.0) == doctest::Approx(-1.0));
  CHECK(eval_Lf(2.0, 0.0) == doctest::Approx(0.0));
  CHECK(eval_Lf(2.0, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("quadratic window for D <= 2 contains v = 2") {
  const ModelParams P = base(2.0);
  CHECK(eval_Lr(2.0, P) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(eval_Lr_prime(2.0, P) == doctest::Approx(1.0).epsilon(1e-13));
  const ModelParams Q = base(1.5);
  CHECK(eval_Lr(2.0, Q) == doctest::Approx(0.0));
  CHECK(eval_Lr_prime(2.0, Q) == doctest::Approx(1.0));
  CHECK(RoadLagrangian(Q).window() == doctest::Approx(2.0 / std::sqrt(0.5)));
}

TEST_CASE("conjugate at D = 9 matches a brute-force grid conjugate") {
  const ModelParams P = base(9.0);
  const RoadLagrangian L(P);
  const ConjugatePoint four = grid_conjugate(4.0, L.hamiltonian());
  const ConjugatePoint three = grid_conjugate(3.0, L.hamiltonian());
  CHECK(four.value == doctest::Approx(0.3702536645051948).epsilon(1e-9));
  CHECK(three.q == doctest::Approx(0.38760822931599637).epsilon(1e-6));
  CHECK(L.eval(4.0) == doctest::Approx(0.3702536645051948).epsilon(1e-10));
  CHECK(L.eval(3.0) == doctest::Approx(-0.025697010653769725).epsilon(1e-9));
  CHECK(L.derivative(3.0) == doctest::Approx(0.38760822931599637).epsilon(1e-7));
  CHECK(L.derivative(4.0) == doctest::Approx(four.q).epsilon(1e-6));
}

TEST_CASE("Fenchel identity and double conjugation") {
  for (double D : {1.5, 3.0, 9.0, 40.0}) {
    const RoadLagrangian L(base(D));
    const auto& H = L.hamiltonian();
    for (double v = -8.0; v <= 8.0; v += 0.37) {
      const ConjugatePoint c = L.conjugate(v);
      CHECK(std::abs(c.value + H.eval(c.q) - v * c.q) <= 1e-10 * (1.0 + std::abs(c.value)));
      CHECK(H.derivative(c.q) == doctest::Approx(v).epsilon(1e-8));
    }
    std::vector<double> vs, ls;
    for (int i = 0; i <= 40000; ++i) {
      vs.push_back(-20.0 + 0.001 * i);
      ls.push_back(L.eval(vs.back()));
    }
    for (double q : {0.0, 0.2, 0.7, 1.5}) {
      if (H.derivative(q) > 19.0) continue;  // maximizer outside the sampled range
      double sup = -1e300;
      for (std::size_t i = 0; i < vs.size(); ++i) sup = std::max(sup, vs[i] * q - ls[i]);
      CHECK(sup == doctest::Approx(H.eval(q)).epsilon(1e-5));
    }
  }
}

TEST_CASE("L_r is dominated by the field Lagrangian, even, convex") {
  for (double D : {1.5, 9.0}) {
    const RoadLagrangian L(base(D));
    for (double v = -6.0; v <= 6.0; v += 0.11) {
      CHECK(L.eval(v) <= eval_Lf(v, 0.0) + 1e-12);
      CHECK(L.eval(v) == doctest::Approx(L.eval(-v)).epsilon(1e-12));
      const double h = 0.01;
      CHECK(L.eval(v - h) + L.eval(v + h) - 2.0 * L.eval(v) >= -1e-9);
    }
  }
}

TEST_CASE("inside the window L_r coincides with the field Lagrangian") {
  const RoadLagrangian L(base(9.0));
  const double w = L.window();
  for (double v : {0.0, 0.3 * w, 0.99 * w}) {
    CHECK(L.eval(v) == doctest::Approx(v * v / 4.0 - 1.0).epsilon(1e-13));
    CHECK(L.derivative(v) == doctest::Approx(v / 2.0));
  }
  CHECK(L.eval(1.5 * w) < (1.5 * w) * (1.5 * w) / 4.0 - 1.0);
}
