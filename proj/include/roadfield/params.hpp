#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace roadfield {

/// Raised when input parameters violate a documented precondition.
class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when two independent computations of the same quantity disagree.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scaled road-field parameters. Field diffusivity and growth rate are
/// normalized to one, so only the road diffusivity D and the exchange
/// coefficients remain.
struct ModelParams {
  double D = 9.0;
  double mu = 1.0;
  double nu = 1.0;
  double kappa = 1.0;
  /// Diffusivity of the second road on a conical domain.
  std::optional<double> D_tilde;

  /// Throws InvalidConfig unless D > 1, mu, nu, kappa > 0 and D_tilde >= D.
  /// The simulator may run with the road decoupled (kappa == 0); pass
  /// allow_decoupled for that case.
  void validate(bool allow_decoupled = false) const;

  /// Same parameters with D replaced by `diffusivity` and no second road.
  [[nodiscard]] ModelParams with_D(double diffusivity) const;

  [[nodiscard]] std::string describe() const;
};

inline void ModelParams::validate(bool allow_decoupled) const {
  auto finite = [](double v) { return v == v && v - v == 0.0; };
  if (!finite(D) || !finite(mu) || !finite(nu) || !finite(kappa)) {
    throw InvalidConfig("model parameters must be finite");
  }
  if (!(D > 1.0)) throw InvalidConfig("road diffusivity D must exceed 1, got " + std::to_string(D));
  if (!(mu > 0.0)) throw InvalidConfig("mu must be positive");
  if (!(nu > 0.0)) throw InvalidConfig("nu must be positive");
  if (allow_decoupled ? !(kappa >= 0.0) : !(kappa > 0.0)) {
    throw InvalidConfig("kappa must be positive");
  }
  if (D_tilde) {
    if (!finite(*D_tilde) || !(*D_tilde >= D)) {
      throw InvalidConfig("D_tilde must be finite and at least D");
    }
  }
}

inline ModelParams ModelParams::with_D(double diffusivity) const {
  ModelParams out = *this;
  out.D = diffusivity;
  out.D_tilde.reset();
  return out;
}

inline std::string ModelParams::describe() const {
  std::string s = "D=" + std::to_string(D) + " mu=" + std::to_string(mu) +
                  " nu=" + std::to_string(nu) + " kappa=" + std::to_string(kappa);
  if (D_tilde) s += " D_tilde=" + std::to_string(*D_tilde);
  return s;
}

}  // namespace roadfield
