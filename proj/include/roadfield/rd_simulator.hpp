#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "roadfield/params.hpp"

namespace roadfield {

/// Raised when the invaded region approaches the truncated far boundary.
class FrontGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discretized road-field system.
///
/// Nodes sit at (x_min + i h, j h) for i < nx, j < ny; row j = 0 is the road
/// Gamma_0. V is stored row-major (index j * nx + i). U holds the road density
/// at every column; in cone mode only columns with x >= 0 belong to Gamma_0
/// and U_far holds the density on Gamma_a at arclength k h.
struct RDState {
  ModelParams params;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double x_min = 0.0;
  double h = 0.0;
  double dt = 0.0;
  double t = 0.0;
  std::vector<double> V;
  std::vector<double> U;

  /// Cone mode: half-angle a of the sector; empty for the half-plane.
  std::optional<double> cone_a;
  std::vector<double> U_far;
  /// Far-boundary proximity guard; disable only for synthetic states that
  /// are not spreading fronts (e.g. uniform equilibria).
  bool guard = true;

  /// Cone mode: 1 for nodes in the closed sector.
  std::vector<std::uint8_t> active;

  [[nodiscard]] double x_of(std::size_t i) const { return x_min + static_cast<double>(i) * h; }
  [[nodiscard]] double y_of(std::size_t j) const { return static_cast<double>(j) * h; }
  [[nodiscard]] double& v(std::size_t i, std::size_t j) { return V[j * nx + i]; }
  [[nodiscard]] double v(std::size_t i, std::size_t j) const { return V[j * nx + i]; }
  [[nodiscard]] bool is_active(std::size_t i, std::size_t j) const {
    return active.empty() || active[j * nx + i] != 0;
  }
  /// Saturation level of the road density, nu / mu.
  [[nodiscard]] double road_capacity() const { return params.nu / params.mu; }

  /// Bilinear interpolation of V over active nodes; nullopt outside the grid.
  [[nodiscard]] std::optional<double> field_at(double x, double y) const;
  /// Linear interpolation of the Gamma_0 density at abscissa x.
  [[nodiscard]] std::optional<double> road_at(double x) const;
  /// Linear interpolation of the Gamma_a density at arclength s (cone mode).
  [[nodiscard]] std::optional<double> far_road_at(double s) const;

  /// h^2-weighted sum of V with half weight on the road row.
  [[nodiscard]] double field_mass() const;
};

/// Half-plane grid over [-Lx, Lx] x [0, Ly]. V = 1 on the half-disk of radius
/// r0, U = nu/mu on |x| <= r0. Requires h > 0, r0 >= 2h, Lx, Ly >= 10 r0.
RDState init_state(const ModelParams& params, double Lx, double Ly, double h, double r0);

/// Cone grid over [-L, L] x [0, L] (x >= 0 only when 2a <= pi/2) with cells
/// outside the sector of half-angle a masked. Gamma_a diffuses with D_tilde
/// when present. L must be a multiple of h.
RDState init_cone_state(const ModelParams& params, double a, double L, double h, double r0);

/// Time step bound used by init_state: 0.9 h^2 / (4 max(1, D)), further
/// capped so every update is a nonnegative combination of old values.
double stable_time_step(const ModelParams& params, double h, bool cone);

/// One explicit Euler step. Throws FrontGuardError when {V >= 1/2} (or the
/// road analogue) comes within 5 cells of a far boundary.
void step(RDState& state);
/// Convenience: copy, step, return.
RDState stepped(RDState state);

/// Largest r along direction theta (angle from the y-axis) with interpolated
/// V >= level; along a road ray the road density is compared with
/// level * nu / mu. nullopt when no sample reaches the level.
std::optional<double> extract_front(const RDState& state, double level, double theta);

struct FrontPoint {
  double t;
  double theta;
  double radius;
};

struct SpeedEstimate {
  double speed;
  double intercept;
  double residual_rms;
  std::size_t points;
};

/// Least-squares slope of radius against time. Throws InvalidConfig for fewer
/// than 10 points.
SpeedEstimate estimate_speed(const std::vector<double>& times, const std::vector<double>& radii);
/// Same, restricted to history points with theta == `theta` and t in
/// [t_max/2, t_max], t_max being the last recorded time.
SpeedEstimate estimate_speed(const std::vector<FrontPoint>& history, double theta);

struct SimulationConfig {
  double h = 0.2;
  double Lx = 160.0;
  double Ly = 90.0;
  double t_max = 40.0;
  double r0 = 1.0;
  double level = 0.5;
  double record_every = 0.5;
  std::vector<double> thetas;
  /// Cone half-angle; when set the cone grid of side max(Lx, Ly) is used.
  std::optional<double> cone_a;
};

struct SimulationResult {
  std::vector<FrontPoint> history;
  std::vector<SpeedEstimate> speeds;  ///< one per config theta
  double min_V = 0.0;
  double max_V = 0.0;
  double min_U = 0.0;
  double max_U = 0.0;
  bool bounds_respected = true;
  std::size_t steps = 0;
  RDState final_state;
};

SimulationResult run_simulation(const ModelParams& params, const SimulationConfig& config);

/// Binary snapshot: magic "RDF1" followed by little-endian float64 values
/// nx, ny, n_far, h, t, x_min, D, mu, nu, kappa, D_tilde (NaN if absent),
/// cone a (NaN for the half-plane), then V (row-major), U, U_far.
void write_snapshot(const RDState& state, const std::string& path);
RDState read_snapshot(const std::string& path);

void write_front_history_csv(const std::vector<FrontPoint>& history, const std::string& path);

}  // namespace roadfield
