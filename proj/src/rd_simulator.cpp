#include "roadfield/rd_simulator.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include "roadfield/conical.hpp"
#include "roadfield/parallel.hpp"

#if defined(__SSE__) || defined(__x86_64__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#define RF_HAVE_SSE_CSR 1
#endif

namespace roadfield {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr std::size_t kGuardCells = 5;
constexpr double kBoundTol = 1e-12;

// Exponential tails underflow into subnormals within a few hundred steps;
// flushing them keeps the stencil at full speed.
class FlushDenormals {
 public:
  FlushDenormals() {
#ifdef RF_HAVE_SSE_CSR
    saved_ = _mm_getcsr();
    _MM_SET_FLUSH_ZERO_MODE(_MM_FLUSH_ZERO_ON);
    _MM_SET_DENORMALS_ZERO_MODE(_MM_DENORMALS_ZERO_ON);
#endif
  }
  ~FlushDenormals() {
#ifdef RF_HAVE_SSE_CSR
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
  unsigned saved_ = 0;
};

std::size_t grid_count(double extent, double h) {
  const double n = extent / h;
  return static_cast<std::size_t>(std::floor(n + 0.5)) + 1;
}

// Precomputed interpolation stencil over active nodes.
struct Stencil {
  std::vector<std::size_t> idx;
  std::vector<double> w;

  [[nodiscard]] double apply(const std::vector<double>& field) const {
    double s = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) s += w[k] * field[idx[k]];
    return s;
  }

  // Weighted value clipped to the range of the data it reads. Least-squares
  // weights can be negative; the clip keeps reconstructions inside the local
  // hull so the update respects the comparison bounds.
  [[nodiscard]] double apply_limited(const std::vector<double>& field) const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k : idx) {
      lo = std::min(lo, field[k]);
      hi = std::max(hi, field[k]);
    }
    return idx.empty() ? 0.0 : std::clamp(apply(field), lo, hi);
  }
};

// Bilinear weights when the enclosing cell is fully active; otherwise a
// least-squares linear fit over nearby active nodes. Both reproduce linear
// fields exactly, which keeps ghost values second-order accurate next to a
// road that cuts through grid cells.
Stencil make_stencil(const RDState& st, double x, double y) {
  Stencil out;
  const double fx = std::clamp((x - st.x_min) / st.h, 0.0, static_cast<double>(st.nx - 1));
  const double fy = std::clamp(y / st.h, 0.0, static_cast<double>(st.ny - 1));
  const auto i0 = std::min(static_cast<std::size_t>(fx), st.nx - 2);
  const auto j0 = std::min(static_cast<std::size_t>(fy), st.ny - 2);
  const double ax = fx - static_cast<double>(i0);
  const double ay = fy - static_cast<double>(j0);
  const std::array<std::size_t, 4> ii{i0, i0 + 1, i0, i0 + 1};
  const std::array<std::size_t, 4> jj{j0, j0, j0 + 1, j0 + 1};
  const std::array<double, 4> ww{(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  bool complete = true;
  for (int k = 0; k < 4; ++k) {
    if (ww[k] > 0.0 && !st.is_active(ii[k], jj[k])) complete = false;
  }
  if (complete) {
    for (int k = 0; k < 4; ++k) {
      if (ww[k] > 0.0) {
        out.idx.push_back(jj[k] * st.nx + ii[k]);
        out.w.push_back(ww[k]);
      }
    }
    return out;
  }

  // Linear least squares in local cell units around (fx, fy).
  std::vector<std::size_t> nodes;
  std::vector<double> dx, dy;
  const auto ic = static_cast<std::int64_t>(std::floor(fx));
  const auto jc = static_cast<std::int64_t>(std::floor(fy));
  for (std::int64_t dj = -1; dj <= 2; ++dj) {
    for (std::int64_t di = -1; di <= 2; ++di) {
      const std::int64_t i = ic + di;
      const std::int64_t j = jc + dj;
      if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(st.nx) ||
          j >= static_cast<std::int64_t>(st.ny)) {
        continue;
      }
      if (!st.is_active(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) continue;
      nodes.push_back(static_cast<std::size_t>(j) * st.nx + static_cast<std::size_t>(i));
      dx.push_back(static_cast<double>(i) - fx);
      dy.push_back(static_cast<double>(j) - fy);
    }
  }
  // Normal equations for V ~ c0 + c1 dx + c2 dy, weighted toward close nodes.
  std::array<double, 9> m{};
  std::vector<double> wt(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    wt[k] = 1.0 / (1.0 + dx[k] * dx[k] + dy[k] * dy[k]);
    const std::array<double, 3> b{1.0, dx[k], dy[k]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[3 * r + c] += wt[k] * b[r] * b[c];
    }
  }
  const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                     m[2] * (m[3] * m[7] - m[4] * m[6]);
  if (nodes.size() >= 3 && std::abs(det) > 1e-10) {
    // First row of the inverse gives the value at the origin.
    const std::array<double, 3> r0{(m[4] * m[8] - m[5] * m[7]) / det,
                                   -(m[1] * m[8] - m[2] * m[7]) / det,
                                   (m[1] * m[5] - m[2] * m[4]) / det};
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      out.idx.push_back(nodes[k]);
      out.w.push_back(wt[k] * (r0[0] + r0[1] * dx[k] + r0[2] * dy[k]));
    }
    return out;
  }
  // Degenerate neighborhood: nearest active node.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double d = std::hypot(dx[k], dy[k]);
    if (d < best) {
      best = d;
      out.idx.assign(1, nodes[k]);
      out.w.assign(1, 1.0);
    }
  }
  return out;
}

double interp_line(const std::vector<double>& u, double f) {
  if (u.empty()) return 0.0;
  f = std::clamp(f, 0.0, static_cast<double>(u.size() - 1));
  const auto k = std::min(static_cast<std::size_t>(f), u.size() - 1);
  if (k + 1 >= u.size()) return u[k];
  const double a = f - static_cast<double>(k);
  return (1.0 - a) * u[k] + a * u[k + 1];
}

void check_common(const ModelParams& params, double h, double r0) {
  params.validate(true);
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidConfig("grid spacing h must be positive");
  if (!(r0 >= 2.0 * h)) throw InvalidConfig("initial radius must be at least 2h");
}

// Cone-mode geometry cached per state layout. Rebuilt on demand.
struct Ghost {
  Stencil mirror;      // interior reflection of the ghost point
  std::size_t owner = 0;  // node whose stencil reads the ghost
  int road = 0;        // 0 = Gamma_0, 1 = Gamma_a
  double s = 0.0;      // arclength of the foot point
  double coeff = 0.0;  // |GM| kappa
};

struct ConeNode {
  std::size_t idx;
  std::array<std::int64_t, 4> nb;  // >= 0: V index, < 0: -(ghost id) - 1
};

struct ConeLayout {
  std::size_t nx = 0, ny = 0, n_far = 0;
  double h = 0.0, x_min = 0.0, a = 0.0;
  std::size_t i_origin = 0;
  std::vector<ConeNode> nodes;
  std::vector<Ghost> ghosts;
  std::vector<Stencil> far_road_field;  // V on Gamma_a at each far-road node
  std::vector<std::size_t> guard_nodes;  // within kGuardCells of a far boundary
};

double road_value(const RDState& st, const ConeLayout& lay, int road, double s) {
  const double f = s / st.h;
  if (road == 0) {
    const double col = static_cast<double>(lay.i_origin) + f;
    const double c = std::clamp(col, static_cast<double>(lay.i_origin), static_cast<double>(st.nx - 1));
    const auto k = std::min(static_cast<std::size_t>(c), st.nx - 1);
    if (k + 1 >= st.nx) return st.U[k];
    const double a = c - static_cast<double>(k);
    return (1.0 - a) * st.U[k] + a * st.U[k + 1];
  }
  return interp_line(st.U_far, f);
}

ConeLayout build_layout(const RDState& st) {
  ConeLayout lay;
  lay.nx = st.nx;
  lay.ny = st.ny;
  lay.n_far = st.U_far.size();
  lay.h = st.h;
  lay.x_min = st.x_min;
  lay.a = *st.cone_a;
  lay.i_origin = static_cast<std::size_t>(std::llround(-st.x_min / st.h));
  const ConeGeometry cone(lay.a);
  const double e0x = 1.0, e0y = 0.0;
  const double eax = std::cos(2.0 * lay.a), eay = std::sin(2.0 * lay.a);
  const std::array<std::int64_t, 4> di{-1, 1, 0, 0};
  const std::array<std::int64_t, 4> dj{0, 0, -1, 1};

  for (std::size_t j = 0; j < st.ny; ++j) {
    for (std::size_t i = 0; i < st.nx; ++i) {
      if (!st.is_active(i, j)) continue;
      ConeNode node{j * st.nx + i, {}};
      for (int d = 0; d < 4; ++d) {
        const std::int64_t ni = static_cast<std::int64_t>(i) + di[d];
        const std::int64_t nj = static_cast<std::int64_t>(j) + dj[d];
        const double gx = st.x_min + static_cast<double>(ni) * st.h;
        const double gy = static_cast<double>(nj) * st.h;
        const bool in_grid = ni >= 0 && nj >= 0 && ni < static_cast<std::int64_t>(st.nx) &&
                             nj < static_cast<std::int64_t>(st.ny);
        if (in_grid && st.is_active(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj))) {
          node.nb[d] = nj * static_cast<std::int64_t>(st.nx) + ni;
          continue;
        }
        if (!in_grid && cone.contains(gx, gy)) {
          // Far boundary: homogeneous Neumann by mirroring.
          const std::int64_t mi = static_cast<std::int64_t>(i) - di[d];
          const std::int64_t mj = static_cast<std::int64_t>(j) - dj[d];
          const bool ok = mi >= 0 && mj >= 0 && mi < static_cast<std::int64_t>(st.nx) &&
                          mj < static_cast<std::int64_t>(st.ny) &&
                          st.is_active(static_cast<std::size_t>(mi), static_cast<std::size_t>(mj));
          node.nb[d] = ok ? mj * static_cast<std::int64_t>(st.nx) + mi
                          : static_cast<std::int64_t>(node.idx);
          continue;
        }
        // Robin ghost against the nearer road.
        auto ray_dist = [&](double ex, double ey) {
          const double s = gx * ex + gy * ey;
          return s >= 0.0 ? std::abs(gx * ey - gy * ex) : std::hypot(gx, gy);
        };
        const double d0 = ray_dist(e0x, e0y);
        const double da = ray_dist(eax, eay);
        Ghost g;
        g.road = (da < d0 - 1e-12) ? 1 : 0;
        const double ex = g.road == 0 ? e0x : eax;
        const double ey = g.road == 0 ? e0y : eay;
        const double s = gx * ex + gy * ey;
        const double bx = s * ex, by = s * ey;
        const double mx = 2.0 * bx - gx, my = 2.0 * by - gy;
        g.s = std::max(0.0, s);
        g.coeff = std::hypot(mx - gx, my - gy) * st.params.kappa;
        g.mirror = make_stencil(st, mx, my);
        g.owner = node.idx;
        lay.ghosts.push_back(g);
        node.nb[d] = -static_cast<std::int64_t>(lay.ghosts.size());
      }
      lay.nodes.push_back(node);
      // Guard band: a far boundary (box edge inside the sector) is near.
      const auto g = static_cast<std::int64_t>(kGuardCells);
      for (const auto& [gi, gj] : {std::pair{-g, std::int64_t{0}}, std::pair{g, std::int64_t{0}},
                                   std::pair{std::int64_t{0}, g}}) {
        const std::int64_t pi = static_cast<std::int64_t>(i) + gi;
        const std::int64_t pj = static_cast<std::int64_t>(j) + gj;
        const bool outside = pi < 0 || pi >= static_cast<std::int64_t>(st.nx) ||
                             pj >= static_cast<std::int64_t>(st.ny);
        if (outside && cone.contains(st.x_min + static_cast<double>(pi) * st.h,
                                     static_cast<double>(pj) * st.h)) {
          lay.guard_nodes.push_back(node.idx);
          break;
        }
      }
    }
  }
  lay.far_road_field.reserve(lay.n_far);
  for (std::size_t k = 0; k < lay.n_far; ++k) {
    const double s = static_cast<double>(k) * st.h;
    lay.far_road_field.push_back(make_stencil(st, s * eax, s * eay));
  }
  return lay;
}

const ConeLayout& layout_for(const RDState& st) {
  thread_local ConeLayout cached;
  thread_local bool valid = false;
  thread_local ModelParams cached_params;
  if (!valid || cached.nx != st.nx || cached.ny != st.ny || cached.h != st.h ||
      cached.x_min != st.x_min || cached.a != *st.cone_a || cached.n_far != st.U_far.size() ||
      cached_params.kappa != st.params.kappa) {
    cached = build_layout(st);
    cached_params = st.params;
    valid = true;
  }
  return cached;
}

void guard_fronts(const RDState& st) {
  const double cap = 0.5 * st.road_capacity();
  const std::size_t g = std::min(kGuardCells, st.nx / 2);
  auto fail = [&](const char* what) {
    throw FrontGuardError(std::string(what) + " front reached the far boundary at t=" +
                          std::to_string(st.t));
  };
  if (st.cone_a) {
    for (std::size_t idx : layout_for(st).guard_nodes) {
      if (st.V[idx] >= 0.5) fail("field");
    }
    for (std::size_t i = st.nx - g; i < st.nx; ++i) {
      if (st.U[i] >= cap) fail("road");
    }
    const std::size_t nf = st.U_far.size();
    for (std::size_t k = nf > kGuardCells ? nf - kGuardCells : 0; k < nf; ++k) {
      if (st.U_far[k] >= cap) fail("far-road");
    }
    return;
  }
  for (std::size_t j = 0; j < st.ny; ++j) {
    const double* row = &st.V[j * st.nx];
    const bool top_band = j + kGuardCells >= st.ny;
    for (std::size_t i = 0; i < st.nx; ++i) {
      if (!top_band && i == g) i = st.nx - g;  // skip the interior columns
      if (row[i] >= 0.5) fail("field");
    }
  }
  for (std::size_t i = 0; i < st.nx; ++i) {
    if (i == g) i = st.nx - g;
    if (st.U[i] >= cap) fail("road");
  }
}

struct Extrema {
  double min_V = std::numeric_limits<double>::infinity();
  double max_V = -std::numeric_limits<double>::infinity();
  double min_U = std::numeric_limits<double>::infinity();
  double max_U = -std::numeric_limits<double>::infinity();
};

void half_plane_rows(const RDState& st, std::vector<double>& out, std::size_t j_begin,
                     std::size_t j_end, const std::vector<double>& ghost) {
  const std::size_t nx = st.nx;
  const double dt = st.dt;
  const double ih2 = 1.0 / (st.h * st.h);
  for (std::size_t j = j_begin; j < j_end; ++j) {
    const double* c = &st.V[j * nx];
    const double* dn = j > 0 ? &st.V[(j - 1) * nx] : ghost.data();
    const double* up = j + 1 < st.ny ? &st.V[(j + 1) * nx] : &st.V[(st.ny - 2) * nx];
    double* o = &out[j * nx];
    {
      const double lap = (2.0 * c[1] + up[0] + dn[0] - 4.0 * c[0]) * ih2;
      o[0] = c[0] + dt * (lap + c[0] * (1.0 - c[0]));
    }
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double lap = (c[i - 1] + c[i + 1] + up[i] + dn[i] - 4.0 * c[i]) * ih2;
      o[i] = c[i] + dt * (lap + c[i] * (1.0 - c[i]));
    }
    {
      const std::size_t i = nx - 1;
      const double lap = (2.0 * c[i - 1] + up[i] + dn[i] - 4.0 * c[i]) * ih2;
      o[i] = c[i] + dt * (lap + c[i] * (1.0 - c[i]));
    }
  }
}

Extrema step_half_plane(RDState& st) {
  const std::size_t nx = st.nx;
  const ModelParams& p = st.params;
  const double dt = st.dt;
  const double ih2 = 1.0 / (st.h * st.h);

  std::vector<double> ghost(nx);
  const double* row0 = st.V.data();
  const double* row1 = st.V.data() + nx;
  for (std::size_t i = 0; i < nx; ++i) {
    ghost[i] = row1[i] + 2.0 * st.h * p.kappa * (p.mu * st.U[i] - p.nu * row0[i]);
  }

  std::vector<double> next(st.V.size());
  const std::size_t workers = std::min<std::size_t>(worker_count(), st.ny);
  if (workers <= 1) {
    half_plane_rows(st, next, 0, st.ny, ghost);
  } else {
    const std::size_t chunk = (st.ny + workers - 1) / workers;
    parallel_for(workers, [&](std::size_t w) {
      FlushDenormals ftz;
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(st.ny, b + chunk);
      if (b < e) half_plane_rows(st, next, b, e, ghost);
    });
  }

  std::vector<double> unext(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    const double ul = i > 0 ? st.U[i - 1] : st.U[1];
    const double ur = i + 1 < nx ? st.U[i + 1] : st.U[nx - 2];
    const double lap = (ul + ur - 2.0 * st.U[i]) * ih2;
    unext[i] = st.U[i] + dt * (p.D * lap + p.nu * row0[i] - p.mu * st.U[i]);
  }

  st.V.swap(next);
  st.U.swap(unext);
  Extrema e;
  const auto [vmin, vmax] = std::minmax_element(st.V.begin(), st.V.end());
  const auto [umin, umax] = std::minmax_element(st.U.begin(), st.U.end());
  e.min_V = *vmin;
  e.max_V = *vmax;
  e.min_U = *umin;
  e.max_U = *umax;
  return e;
}

Extrema step_cone(RDState& st) {
  const ConeLayout& lay = layout_for(st);
  const ModelParams& p = st.params;
  const double dt = st.dt;
  const double ih2 = 1.0 / (st.h * st.h);
  const double Dt = p.D_tilde.value_or(p.D);

  std::vector<double> gv(lay.ghosts.size());
  for (std::size_t g = 0; g < lay.ghosts.size(); ++g) {
    const Ghost& gh = lay.ghosts[g];
    const double road = road_value(st, lay, gh.road, gh.s);
    // Exchange uses the owning node's density; it sits within one cell of the
    // foot point, and the resulting diagonal term is covered by the time step.
    gv[g] = gh.mirror.apply_limited(st.V) + gh.coeff * (p.mu * road - p.nu * st.V[gh.owner]);
  }

  std::vector<double> next(st.V.size(), 0.0);
  auto value = [&](std::int64_t ref) {
    return ref >= 0 ? st.V[static_cast<std::size_t>(ref)] : gv[static_cast<std::size_t>(-ref - 1)];
  };
  for (const ConeNode& n : lay.nodes) {
    const double c = st.V[n.idx];
    const double lap = (value(n.nb[0]) + value(n.nb[1]) + value(n.nb[2]) + value(n.nb[3]) - 4.0 * c) * ih2;
    next[n.idx] = c + dt * (lap + c * (1.0 - c));
  }

  // Gamma_0: columns from the corner outward; Neumann at both ends.
  std::vector<double> unext(st.U.size(), 0.0);
  const std::size_t i0 = lay.i_origin;
  for (std::size_t i = i0; i < st.nx; ++i) {
    const double ul = i > i0 ? st.U[i - 1] : st.U[i + 1];
    const double ur = i + 1 < st.nx ? st.U[i + 1] : st.U[i - 1];
    const double lap = (ul + ur - 2.0 * st.U[i]) * ih2;
    unext[i] = st.U[i] + dt * (p.D * lap + p.nu * st.V[i] - p.mu * st.U[i]);
  }
  std::vector<double> fnext(st.U_far.size(), 0.0);
  const std::size_t nf = st.U_far.size();
  for (std::size_t k = 0; k < nf; ++k) {
    const double ul = k > 0 ? st.U_far[k - 1] : st.U_far[1];
    const double ur = k + 1 < nf ? st.U_far[k + 1] : st.U_far[k - 1];
    const double lap = (ul + ur - 2.0 * st.U_far[k]) * ih2;
    const double vb = lay.far_road_field[k].apply_limited(st.V);
    fnext[k] = st.U_far[k] + dt * (Dt * lap + p.nu * vb - p.mu * st.U_far[k]);
  }
  // Both roads meet at the corner node; share their averaged density.
  const double corner = 0.5 * (unext[i0] + fnext[0]);
  unext[i0] = corner;
  fnext[0] = corner;

  st.V.swap(next);
  st.U.swap(unext);
  st.U_far.swap(fnext);

  Extrema e;
  for (const ConeNode& n : lay.nodes) {
    e.min_V = std::min(e.min_V, st.V[n.idx]);
    e.max_V = std::max(e.max_V, st.V[n.idx]);
  }
  for (std::size_t i = i0; i < st.nx; ++i) {
    e.min_U = std::min(e.min_U, st.U[i]);
    e.max_U = std::max(e.max_U, st.U[i]);
  }
  for (double u : st.U_far) {
    e.min_U = std::min(e.min_U, u);
    e.max_U = std::max(e.max_U, u);
  }
  return e;
}

Extrema step_impl(RDState& st) {
  FlushDenormals ftz;
  Extrema e = st.cone_a ? step_cone(st) : step_half_plane(st);
  st.t += st.dt;
  if (st.guard) guard_fronts(st);
  return e;
}

std::uint64_t swap_bytes(std::uint64_t v) {
  std::uint64_t out = 0;
  for (int k = 0; k < 8; ++k) out = (out << 8) | ((v >> (8 * k)) & 0xffu);
  return out;
}

// Byte-level little-endian float64 I/O.
void put_f64(std::ofstream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = swap_bytes(bits);
  std::array<char, 8> buf{};
  std::memcpy(buf.data(), &bits, 8);
  out.write(buf.data(), 8);
}

double get_f64(std::ifstream& in) {
  std::array<char, 8> buf{};
  if (!in.read(buf.data(), 8)) throw InvalidConfig("snapshot truncated");
  std::uint64_t bits = 0;
  std::memcpy(&bits, buf.data(), 8);
  if constexpr (std::endian::native == std::endian::big) bits = swap_bytes(bits);
  return std::bit_cast<double>(bits);
}

std::size_t to_count(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) {
    throw InvalidConfig(std::string("snapshot has an invalid ") + what);
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

double stable_time_step(const ModelParams& params, double h, bool cone) {
  const double dmax = std::max({1.0, params.D, params.D_tilde.value_or(params.D)});
  const double h2 = h * h;
  const double base = 0.9 * h2 / (4.0 * dmax);
  // Nonnegative update coefficients (discrete maximum principle).
  const double ghosts = cone ? 2.0 : 1.0;
  const double field = 1.0 / (4.0 / h2 + 1.0);
  const double robin = 1.0 / ((4.0 + ghosts * 2.0 * h * params.kappa * params.nu) / h2 + 1.0);
  const double road = 1.0 / (2.0 * dmax / h2 + params.mu);
  return std::min(base, 0.9 * std::min({field, robin, road}));
}

std::optional<double> RDState::field_at(double x, double y) const {
  const double eps = 1e-9 * h;
  if (x < x_min - eps || x > x_of(nx - 1) + eps || y < -eps || y > y_of(ny - 1) + eps) {
    return std::nullopt;
  }
  return make_stencil(*this, x, y).apply(V);
}

std::optional<double> RDState::road_at(double x) const {
  const double eps = 1e-9 * h;
  const double lo = cone_a ? 0.0 : x_min;
  if (x < lo - eps || x > x_of(nx - 1) + eps) return std::nullopt;
  return interp_line(U, (x - x_min) / h);
}

std::optional<double> RDState::far_road_at(double s) const {
  if (!cone_a || U_far.empty()) return std::nullopt;
  if (s < -1e-9 * h || s > static_cast<double>(U_far.size() - 1) * h + 1e-9 * h) return std::nullopt;
  return interp_line(U_far, s / h);
}

double RDState::field_mass() const {
  double m = 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    const double wy = j == 0 ? 0.5 : 1.0;
    for (std::size_t i = 0; i < nx; ++i) {
      if (is_active(i, j)) m += wy * V[j * nx + i];
    }
  }
  return m * h * h;
}

RDState init_state(const ModelParams& params, double Lx, double Ly, double h, double r0) {
  check_common(params, h, r0);
  if (params.D_tilde) throw InvalidConfig("D_tilde applies only to the cone");
  if (!(Lx >= 10.0 * r0) || !(Ly >= 10.0 * r0)) {
    throw InvalidConfig("domain half-width and height must be at least 10 r0");
  }
  RDState st;
  st.params = params;
  st.h = h;
  st.nx = 2 * (grid_count(Lx, h) - 1) + 1;
  st.ny = grid_count(Ly, h);
  st.x_min = -static_cast<double>((st.nx - 1) / 2) * h;
  st.dt = stable_time_step(params, h, false);
  st.V.assign(st.nx * st.ny, 0.0);
  st.U.assign(st.nx, 0.0);
  const double r2 = r0 * r0 * (1.0 + 1e-12);
  for (std::size_t j = 0; j < st.ny; ++j) {
    for (std::size_t i = 0; i < st.nx; ++i) {
      const double x = st.x_of(i), y = st.y_of(j);
      if (x * x + y * y <= r2) st.v(i, j) = 1.0;
    }
  }
  for (std::size_t i = 0; i < st.nx; ++i) {
    if (std::abs(st.x_of(i)) <= r0 * (1.0 + 1e-12)) st.U[i] = st.road_capacity();
  }
  return st;
}

RDState init_cone_state(const ModelParams& params, double a, double L, double h, double r0) {
  check_common(params, h, r0);
  const ConeGeometry cone(a);
  if (!(L >= 10.0 * r0)) throw InvalidConfig("cone domain side must be at least 10 r0");
  RDState st;
  st.params = params;
  st.h = h;
  st.cone_a = a;
  const std::size_t n = grid_count(L, h);
  const bool left = 2.0 * a > kHalfPi + 1e-12;
  st.nx = left ? 2 * (n - 1) + 1 : n;
  st.ny = n;
  st.x_min = left ? -static_cast<double>(n - 1) * h : 0.0;
  st.dt = stable_time_step(params, h, true);
  st.V.assign(st.nx * st.ny, 0.0);
  st.U.assign(st.nx, 0.0);
  st.active.assign(st.nx * st.ny, 0);
  const double r2 = r0 * r0 * (1.0 + 1e-12);
  for (std::size_t j = 0; j < st.ny; ++j) {
    for (std::size_t i = 0; i < st.nx; ++i) {
      const double x = st.x_of(i), y = st.y_of(j);
      if (!cone.contains(x, y)) continue;
      st.active[j * st.nx + i] = 1;
      if (x * x + y * y <= r2) st.v(i, j) = 1.0;
    }
  }
  for (std::size_t i = 0; i < st.nx; ++i) {
    const double x = st.x_of(i);
    if (x >= -1e-12 * h && x <= r0 * (1.0 + 1e-12)) st.U[i] = st.road_capacity();
  }
  // Gamma_a nodes until the ray leaves the box.
  const double ex = std::cos(2.0 * a), ey = std::sin(2.0 * a);
  const double x_hi = st.x_of(st.nx - 1), y_hi = st.y_of(st.ny - 1);
  double s_max = std::numeric_limits<double>::infinity();
  if (ex > 1e-12) s_max = std::min(s_max, x_hi / ex);
  if (ex < -1e-12) s_max = std::min(s_max, st.x_min / ex);
  if (ey > 1e-12) s_max = std::min(s_max, y_hi / ey);
  const auto nf = static_cast<std::size_t>(std::floor(s_max / h + 1e-9)) + 1;
  st.U_far.assign(nf, 0.0);
  for (std::size_t k = 0; k < nf; ++k) {
    if (static_cast<double>(k) * h <= r0 * (1.0 + 1e-12)) st.U_far[k] = st.road_capacity();
  }
  return st;
}

void step(RDState& state) { step_impl(state); }

RDState stepped(RDState state) {
  step(state);
  return state;
}

std::optional<double> extract_front(const RDState& st, double level, double theta) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidConfig("front level must lie in (0, 1)");
  constexpr double kRayTol = 1e-9;
  enum class Ray { Field, Road, RoadNegative, FarRoad } kind = Ray::Field;
  if (st.cone_a) {
    const ConeGeometry cone(*st.cone_a);
    if (theta > kHalfPi + kRayTol || theta < cone.far_road_theta() - kRayTol) {
      throw InvalidConfig("ray lies outside the cone");
    }
    if (std::abs(theta - kHalfPi) < kRayTol) kind = Ray::Road;
    else if (std::abs(theta - cone.far_road_theta()) < kRayTol) kind = Ray::FarRoad;
  } else {
    if (std::abs(theta) > kHalfPi + kRayTol) throw InvalidConfig("ray lies outside the half-plane");
    if (std::abs(theta - kHalfPi) < kRayTol) kind = Ray::Road;
    else if (std::abs(theta + kHalfPi) < kRayTol) kind = Ray::RoadNegative;
  }
  const double threshold = kind == Ray::Field ? level : level * st.road_capacity();
  auto sample = [&](double r) -> std::optional<double> {
    switch (kind) {
      case Ray::Road: return st.road_at(r);
      case Ray::RoadNegative: return st.road_at(-r);
      case Ray::FarRoad: return st.far_road_at(r);
      case Ray::Field: break;
    }
    return st.field_at(r * std::sin(theta), std::max(0.0, r * std::cos(theta)));
  };
  const double dr = st.h / 4.0;
  bool any_above = false;
  bool crossed = false;
  double last_above = 0.0, crossing = 0.0;
  double prev_r = 0.0, prev_v = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double r = static_cast<double>(k) * dr;
    const auto v = sample(r);
    if (!v) break;
    if (*v >= threshold) {
      any_above = true;
      crossed = false;
      last_above = r;
    } else if (any_above && !crossed && prev_v >= threshold) {
      crossed = true;
      crossing = prev_r + (prev_v - threshold) / (prev_v - *v) * (r - prev_r);
    }
    prev_r = r;
    prev_v = *v;
  }
  if (!any_above) return std::nullopt;
  return crossed ? crossing : last_above;
}

SpeedEstimate estimate_speed(const std::vector<double>& times, const std::vector<double>& radii) {
  if (times.size() != radii.size()) throw InvalidConfig("history columns differ in length");
  const std::size_t n = times.size();
  if (n < 10) throw InvalidConfig("speed estimate needs at least 10 history points");
  double mt = 0.0, mr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mt += times[k];
    mr += radii[k];
  }
  mt /= static_cast<double>(n);
  mr /= static_cast<double>(n);
  double stt = 0.0, str = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    stt += (times[k] - mt) * (times[k] - mt);
    str += (times[k] - mt) * (radii[k] - mr);
  }
  if (!(stt > 0.0)) throw InvalidConfig("history times are all equal");
  SpeedEstimate out;
  out.speed = str / stt;
  out.intercept = mr - out.speed * mt;
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = radii[k] - (out.intercept + out.speed * times[k]);
    ss += e * e;
  }
  out.residual_rms = std::sqrt(ss / static_cast<double>(n));
  out.points = n;
  return out;
}

SpeedEstimate estimate_speed(const std::vector<FrontPoint>& history, double theta) {
  double t_max = -std::numeric_limits<double>::infinity();
  for (const auto& fp : history) {
    if (fp.theta == theta) t_max = std::max(t_max, fp.t);
  }
  std::vector<double> ts, rs;
  for (const auto& fp : history) {
    if (fp.theta == theta && fp.t >= 0.5 * t_max) {
      ts.push_back(fp.t);
      rs.push_back(fp.radius);
    }
  }
  return estimate_speed(ts, rs);
}

SimulationResult run_simulation(const ModelParams& params, const SimulationConfig& config) {
  if (!(config.t_max > 0.0)) throw InvalidConfig("t_max must be positive");
  if (!(config.record_every > 0.0)) throw InvalidConfig("record interval must be positive");
  SimulationResult res;
  res.final_state = config.cone_a
                        ? init_cone_state(params, *config.cone_a, std::max(config.Lx, config.Ly),
                                          config.h, config.r0)
                        : init_state(params, config.Lx, config.Ly, config.h, config.r0);
  RDState& st = res.final_state;
  const double cap = st.road_capacity();
  res.min_V = 0.0;
  res.max_V = 1.0;
  res.min_U = 0.0;
  res.max_U = cap;

  auto record = [&] {
    for (double th : config.thetas) {
      if (const auto r = extract_front(st, config.level, th)) {
        res.history.push_back({st.t, th, *r});
      }
    }
  };
  record();
  const auto n_steps = static_cast<std::size_t>(std::ceil(config.t_max / st.dt - 1e-9));
  const auto per_record = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.record_every / st.dt)));
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const Extrema e = step_impl(st);
    res.min_V = std::min(res.min_V, e.min_V);
    res.max_V = std::max(res.max_V, e.max_V);
    res.min_U = std::min(res.min_U, e.min_U);
    res.max_U = std::max(res.max_U, e.max_U);
    if (k % per_record == 0 || k == n_steps) record();
  }
  res.steps = n_steps;
  res.bounds_respected = res.min_V >= -kBoundTol && res.max_V <= 1.0 + kBoundTol &&
                         res.min_U >= -kBoundTol && res.max_U <= cap * (1.0 + kBoundTol);
  for (double th : config.thetas) res.speeds.push_back(estimate_speed(res.history, th));
  return res;
}

void write_snapshot(const RDState& st, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfig("cannot open snapshot for writing: " + path);
  out.write("RDF1", 4);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double v : {static_cast<double>(st.nx), static_cast<double>(st.ny),
                   static_cast<double>(st.U_far.size()), st.h, st.t, st.x_min, st.params.D,
                   st.params.mu, st.params.nu, st.params.kappa, st.params.D_tilde.value_or(nan),
                   st.cone_a.value_or(nan)}) {
    put_f64(out, v);
  }
  for (double v : st.V) put_f64(out, v);
  for (double v : st.U) put_f64(out, v);
  for (double v : st.U_far) put_f64(out, v);
  if (!out) throw InvalidConfig("failed writing snapshot: " + path);
}

RDState read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("cannot open snapshot: " + path);
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || std::memcmp(magic.data(), "RDF1", 4) != 0) {
    throw InvalidConfig("not an RDF1 snapshot: " + path);
  }
  RDState st;
  st.nx = to_count(get_f64(in), "nx");
  st.ny = to_count(get_f64(in), "ny");
  const std::size_t nf = to_count(get_f64(in), "far-road length");
  st.h = get_f64(in);
  st.t = get_f64(in);
  st.x_min = get_f64(in);
  st.params.D = get_f64(in);
  st.params.mu = get_f64(in);
  st.params.nu = get_f64(in);
  st.params.kappa = get_f64(in);
  const double dt_tilde = get_f64(in);
  const double a = get_f64(in);
  if (!std::isnan(dt_tilde)) st.params.D_tilde = dt_tilde;
  if (!std::isnan(a)) st.cone_a = a;
  st.V.resize(st.nx * st.ny);
  for (double& v : st.V) v = get_f64(in);
  st.U.resize(st.nx);
  for (double& v : st.U) v = get_f64(in);
  st.U_far.resize(nf);
  for (double& v : st.U_far) v = get_f64(in);
  st.dt = stable_time_step(st.params, st.h, st.cone_a.has_value());
  if (st.cone_a) {
    const ConeGeometry cone(*st.cone_a);
    st.active.assign(st.nx * st.ny, 0);
    for (std::size_t j = 0; j < st.ny; ++j) {
      for (std::size_t i = 0; i < st.nx; ++i) {
        st.active[j * st.nx + i] = cone.contains(st.x_of(i), st.y_of(j)) ? 1 : 0;
      }
    }
  }
  return st;
}

void write_front_history_csv(const std::vector<FrontPoint>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot open front history for writing: " + path);
  out.precision(17);
  out << "t,theta,radius\n";
  for (const auto& fp : history) out << fp.t << ',' << fp.theta << ',' << fp.radius << '\n';
}

}  // namespace roadfield
