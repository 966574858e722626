#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twofold/normal_form.hpp"
#include "twofold/ode.hpp"
#include "twofold/parallel.hpp"
#include "twofold/regularization.hpp"

namespace twofold {

// Entry section: {x = -delta, z in I_in, lip(z) <= y <= zeta_w} with
// lip(z) = eps*(h(-z/delta) - varsigma). Exit section: {y = nu} cut to R_out.
struct SectionGeometry {
  double delta = 0.5;
  double nu = 0.1;
  double zeta_w = 0.05;
  double varsigma = 1.0;
  Vec2 I_in{-1.0, -0.5};
  Rect R_out{{-2.0, -1.0}, {5.0, 3.0}};
};

struct GridSpec {
  int n_y = 5;
  int n_z = 5;
};

inline void validate_geometry(const NormalFormParams& np, const SectionGeometry& g) {
  if (!(g.delta > 0.0 && g.nu > 0.0 && g.zeta_w > 0.0 && g.varsigma > 0.0))
    throw error(errc::config_error, "delta, nu, zeta_w, varsigma must be positive");
  if (!(g.I_in[0] <= g.I_in[1]) || !(g.I_in[1] < 0.0))
    throw error(errc::config_error, "I_in must be an interval on the negative z-axis");
  if (!(g.R_out.lo[0] < g.R_out.hi[0] && g.R_out.lo[1] < g.R_out.hi[1]))
    throw error(errc::config_error, "R_out must be a nonempty rectangle");
  EigenData ed = eigen_data(np);
  if (!in_funnel(np, -g.delta, g.I_in[0]) || !in_funnel(np, -g.delta, g.I_in[1]))
    throw error(errc::outside_funnel, "I_in must lie inside the funnel at x = -delta");
  double z_weak = ed.chi_plus * g.delta;
  if (g.I_in[0] <= z_weak && z_weak <= g.I_in[1])
    throw error(errc::straddles_weak_canard, "I_in must not contain the weak-canard height");
  Vec3 u = u_out(np, g.nu);
  if (u[0] < g.R_out.lo[0] || u[0] > g.R_out.hi[0] || u[2] < g.R_out.lo[1] ||
      u[2] > g.R_out.hi[1])
    throw error(errc::config_error, "R_out must contain the exit point's (x,z) projection");
}

// lower admissible y on the entry section over a given z
inline double entry_lip(const NormalFormParams& np, const RegularizationFn& phi, double eps,
                        const SectionGeometry& g, double z) {
  return eps * (critical_manifold_h(np, phi, -z / g.delta) - g.varsigma);
}

namespace detail {

constexpr double kTransitBudget = 100.0;

inline Section exit_section(const SectionGeometry& g) {
  Section s;
  s.kind = SectionKind::PlaneY;
  s.value = g.nu;
  s.direction = SectionDirection::Increasing;
  s.terminal = true;
  s.bounds = g.R_out;
  return s;
}

}  // namespace detail

// Full trajectory of one entry point (-delta, y, z) up to the exit section.
inline Trajectory map_point_trajectory(const NormalFormParams& np, const RegularizationFn& phi,
                                       double eps, const SectionGeometry& geom, double y, double z,
                                       const IntegratorConfig& cfg) {
  Vec3 p0{-geom.delta, y, z};
  return integrate_regularized(np, phi, eps, p0, 0.0, detail::kTransitBudget, cfg,
                               {detail::exit_section(geom)});
}

// Image of one entry point on the exit section, as (x, z).
inline Vec2 map_one_point(const NormalFormParams& np, const RegularizationFn& phi, double eps,
                          const SectionGeometry& geom, double y, double z,
                          const IntegratorConfig& cfg) {
  Trajectory tr = map_point_trajectory(np, phi, eps, geom, y, z, cfg);
  if (tr.status != TrajStatus::TerminalEvent)
    throw error(errc::escape_out_of_r_out, "trajectory left without hitting the exit window");
  return {tr.y_end[0], tr.y_end[2]};
}

// 2x2 derivative of the section map by central differences in (y, z).
inline Mat2 fd_jacobian_L(const NormalFormParams& np, const RegularizationFn& phi, double eps,
                          const SectionGeometry& geom, double y, double z,
                          const IntegratorConfig& cfg) {
  double sr = std::sqrt(cfg.rel_tol);
  double hy = std::max(1e-6, sr * std::max(1.0, std::abs(y)));
  double hz = std::max(1e-6, sr * std::max(1.0, std::abs(z)));
  Vec2 fyp = map_one_point(np, phi, eps, geom, y + hy, z, cfg);
  Vec2 fym = map_one_point(np, phi, eps, geom, y - hy, z, cfg);
  Vec2 fzp = map_one_point(np, phi, eps, geom, y, z + hz, cfg);
  Vec2 fzm = map_one_point(np, phi, eps, geom, y, z - hz, cfg);
  Mat2 j;
  j[0][0] = (fyp[0] - fym[0]) / (2.0 * hy);
  j[1][0] = (fyp[1] - fym[1]) / (2.0 * hy);
  j[0][1] = (fzp[0] - fzm[0]) / (2.0 * hz);
  j[1][1] = (fzp[1] - fzm[1]) / (2.0 * hz);
  return j;
}

// Same derivative from the variational flow: integrate two tangent vectors
// along the trajectory and project them onto the exit section.
inline Mat2 tangent_jacobian_L(const NormalFormParams& np, const RegularizationFn& phi, double eps,
                               const SectionGeometry& geom, double y, double z,
                               const IntegratorConfig& cfg_in) {
  IntegratorConfig cfg = resolve_config(cfg_in, eps * 1e-4);
  auto rhs = [&np, &phi, eps](double, const StateN<9>& s, StateN<9>& ds) {
    Vec3 p{s[0], s[1], s[2]};
    Vec3 f = regularized_field(np, phi, eps, p);
    Mat3 j = regularized_jacobian(np, phi, eps, p);
    ds[0] = f[0];
    ds[1] = f[1];
    ds[2] = f[2];
    for (int col = 0; col < 2; ++col) {
      const double* v = s.data() + 3 + 3 * col;
      double* dv = ds.data() + 3 + 3 * col;
      for (int r = 0; r < 3; ++r)
        dv[r] = j[r][0] * v[0] + j[r][1] * v[1] + j[r][2] * v[2];
    }
  };
  StateN<9> s0{-geom.delta, y, z, 0, 1, 0, 0, 0, 1};
  EventSpec<9> exit_ev;
  double nu = geom.nu;
  exit_ev.g = [nu](double, const StateN<9>& s) { return s[1] - nu; };
  exit_ev.direction = 1;
  exit_ev.terminal = true;
  Rect r = geom.R_out;
  exit_ev.accept = [r](double, const StateN<9>& s) {
    return s[0] >= r.lo[0] && s[0] <= r.hi[0] && s[2] >= r.lo[1] && s[2] <= r.hi[1];
  };
  auto res = solve_dopri5<9>(rhs, s0, 0.0, detail::kTransitBudget, cfg, {exit_ev}, 0.0, false);
  if (res.status != OdeStatus::TerminalEvent)
    throw error(errc::escape_out_of_r_out, "trajectory left without hitting the exit window");
  Vec3 p{res.y_end[0], res.y_end[1], res.y_end[2]};
  Vec3 f = regularized_field(np, phi, eps, p);
  Mat2 j;
  for (int col = 0; col < 2; ++col) {
    const double* v = res.y_end.data() + 3 + 3 * col;
    double dt = -v[1] / f[1];  // hold the section coordinate fixed
    j[0][col] = v[0] + f[0] * dt;
    j[1][col] = v[2] + f[2] * dt;
  }
  return j;
}

struct PointFailure {
  int index;
  double y, z;
  errc code;
  std::string message;
};

struct SectionMapResult {
  double epsilon;
  std::vector<Vec2> grid;  // (y, z) entry coordinates
  std::vector<std::optional<Vec2>> images;
  std::vector<std::optional<Mat2>> jacobians;
  double diam_image = 0.0;
  double max_dist_to_u_out = 0.0;
  double max_op_norm_jac = 0.0;
  std::vector<PointFailure> failures;
};

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  v.reserve(static_cast<size_t>(std::max(n, 0)));
  if (n == 1) {
    v.push_back(a);
    return v;
  }
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

inline SectionMapResult local_map_L(const NormalFormParams& np, const RegularizationFn& phi,
                                    double eps, const SectionGeometry& geom,
                                    const GridSpec& grid_spec, const IntegratorConfig& cfg,
                                    int jobs = 1, bool with_jacobians = true) {
  if (!(eps > 0.0)) throw error(errc::nonpositive_epsilon, "eps must be positive");
  AssumptionReport a = check_assumption_A(np);
  if (!a.holds) throw error(errc::assumption_violated, a.diagnostic);
  if (!check_assumption_B(np))
    throw error(errc::assumption_violated, "eigenvalue ratio too close to an integer");
  validate_geometry(np, geom);
  if (grid_spec.n_y < 1 || grid_spec.n_z < 1)
    throw error(errc::config_error, "grid must have at least one point per axis");

  SectionMapResult out;
  out.epsilon = eps;
  for (double z : linspace(geom.I_in[0], geom.I_in[1], grid_spec.n_z)) {
    double lip = entry_lip(np, phi, eps, geom, z);
    for (double y : linspace(lip, geom.zeta_w, grid_spec.n_y)) out.grid.push_back({y, z});
  }
  size_t n = out.grid.size();
  out.images.resize(n);
  out.jacobians.resize(n);
  std::vector<std::optional<PointFailure>> fails(n);
  std::vector<std::optional<PointFailure>> jac_fails(n);

  parallel_for(n, jobs, [&](size_t i) {
    double y = out.grid[i][0], z = out.grid[i][1];
    try {
      out.images[i] = map_one_point(np, phi, eps, geom, y, z, cfg);
    } catch (const error& e) {
      fails[i] = PointFailure{static_cast<int>(i), y, z, e.code(), e.what()};
      return;
    }
    if (!with_jacobians) return;
    try {
      out.jacobians[i] = fd_jacobian_L(np, phi, eps, geom, y, z, cfg);
    } catch (const error& e) {
      jac_fails[i] = PointFailure{static_cast<int>(i), y, z, e.code(),
                                  std::string("jacobian probe: ") + e.what()};
    }
  });

  for (size_t i = 0; i < n; ++i) {
    if (fails[i]) out.failures.push_back(*fails[i]);
    if (jac_fails[i]) out.failures.push_back(*jac_fails[i]);
  }

  Vec3 u = u_out(np, geom.nu);
  Vec2 u_proj{u[0], u[2]};
  for (size_t i = 0; i < n; ++i) {
    if (!out.images[i]) continue;
    Vec2 im = *out.images[i];
    out.max_dist_to_u_out = std::max(out.max_dist_to_u_out, norm(im - u_proj));
    for (size_t k = i + 1; k < n; ++k)
      if (out.images[k]) out.diam_image = std::max(out.diam_image, norm(im - *out.images[k]));
    if (out.jacobians[i])
      out.max_op_norm_jac = std::max(out.max_op_norm_jac, op_norm(*out.jacobians[i]));
  }
  return out;
}

// --- global return and cycles ---------------------------------------------------

struct AffineMap2 {
  Mat2 a{{Vec2{0.0, 0.0}, Vec2{0.0, 0.0}}};
  Vec2 b{0.0, 0.0};

  Vec2 operator()(const Vec2& v) const { return mat_apply(a, v) + b; }
};

namespace detail {

inline Vec2 admissible_entry(const NormalFormParams& np, const RegularizationFn& phi, double eps,
                             const SectionGeometry& geom, const AffineMap2& G, const Vec2& p0) {
  Vec2 in = G(p0);
  double y = in[0], z = in[1];
  if (!(z >= geom.I_in[0] && z <= geom.I_in[1]))
    throw error(errc::global_return_out_of_range, "returned z leaves I_in");
  double lip = entry_lip(np, phi, eps, geom, z);
  if (!(y >= lip && y <= geom.zeta_w))
    throw error(errc::global_return_out_of_range, "returned y leaves the admissible strip");
  return in;
}

inline Vec2 poincare_point(const NormalFormParams& np, const RegularizationFn& phi, double eps,
                           const SectionGeometry& geom, const AffineMap2& G, const Vec2& p0,
                           const IntegratorConfig& cfg) {
  Vec2 in = admissible_entry(np, phi, eps, geom, G, p0);
  return map_one_point(np, phi, eps, geom, in[0], in[1], cfg);
}

}  // namespace detail

// One global-return step: p on the exit section, G(p) back on the entry
// section as (y, z), then the forward map. Returns the new exit point and the
// chain-rule derivative.
inline std::pair<Vec2, Mat2> poincare_map(const NormalFormParams& np, const RegularizationFn& phi,
                                          double eps, const SectionGeometry& geom,
                                          const AffineMap2& G, const Vec2& p0,
                                          const IntegratorConfig& cfg) {
  Vec2 in = detail::admissible_entry(np, phi, eps, geom, G, p0);
  Vec2 p1 = map_one_point(np, phi, eps, geom, in[0], in[1], cfg);
  Mat2 jl = fd_jacobian_L(np, phi, eps, geom, in[0], in[1], cfg);
  Mat2 dp;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) dp[r][c] = jl[r][0] * G.a[0][c] + jl[r][1] * G.a[1][c];
  return {p1, dp};
}

struct LimitCycleResult {
  Vec2 fixed_point;
  Vec2 floquet_moduli;  // descending
  Mat2 dp;
  int newton_iters = 0;
  bool used_picard_fallback = false;
  Trajectory cycle;  // the forward leg from the entry section, one period
};

inline LimitCycleResult find_limit_cycle(const NormalFormParams& np, const RegularizationFn& phi,
                                         double eps, const SectionGeometry& geom,
                                         const AffineMap2& G, const IntegratorConfig& cfg) {
  Vec3 u = u_out(np, geom.nu);
  Vec2 p{u[0], u[2]};
  const double tol = 1e-9;
  Mat2 dp{};
  bool converged = false;
  int iters = 0;
  bool picard = false;

  for (int it = 0; it < 20 && !converged; ++it) {
    iters = it + 1;
    auto [pm, dpm] = poincare_map(np, phi, eps, geom, G, p, cfg);
    dp = dpm;
    Vec2 r = p - pm;
    if (norm(r) <= tol) {
      converged = true;
      break;
    }
    // solve (I - DP) d = r
    double m00 = 1.0 - dp[0][0], m01 = -dp[0][1], m10 = -dp[1][0], m11 = 1.0 - dp[1][1];
    double det = m00 * m11 - m01 * m10;
    if (std::abs(det) < 1e-14) break;
    Vec2 d{(m11 * r[0] - m01 * r[1]) / det, (-m10 * r[0] + m00 * r[1]) / det};
    double lam = 1.0;
    bool stepped = false;
    for (int halving = 0; halving < 7; ++halving, lam *= 0.5) {
      Vec2 cand = p - Vec2{lam * d[0], lam * d[1]};
      try {
        Vec2 pc = detail::poincare_point(np, phi, eps, geom, G, cand, cfg);
        if (norm(cand - pc) <= (1.0 - 0.5 * lam) * norm(r) || lam <= 1.0 / 64) {
          p = cand;
          stepped = true;
          break;
        }
      } catch (const error&) {
        // shrink the step when the candidate leaves the admissible region
      }
    }
    if (!stepped) break;
  }

  if (!converged) {
    picard = true;
    for (int it = 0; it < 200 && !converged; ++it) {
      Vec2 pm = detail::poincare_point(np, phi, eps, geom, G, p, cfg);
      if (norm(p - pm) <= tol) converged = true;
      p = pm;
    }
    if (!converged) throw error(errc::newton_diverged, "no fixed point after Newton and Picard");
    dp = poincare_map(np, phi, eps, geom, G, p, cfg).second;
  }

  LimitCycleResult out;
  out.fixed_point = p;
  out.dp = dp;
  out.floquet_moduli = eig_moduli(dp);
  out.newton_iters = iters;
  out.used_picard_fallback = picard;
  Vec2 in = G(p);
  out.cycle = map_point_trajectory(np, phi, eps, geom, in[0], in[1], cfg);
  return out;
}

// Deepest y-excursion across the entry grid, from samples and dense midpoints.
inline double case_b_dip_depth(const NormalFormParams& np, const RegularizationFn& phi, double eps,
                               const SectionGeometry& geom, const IntegratorConfig& cfg,
                               const GridSpec& grid_spec = {2, 7}, int jobs = 1) {
  if (!(eps > 0.0)) throw error(errc::nonpositive_epsilon, "eps must be positive");
  validate_geometry(np, geom);
  std::vector<Vec2> grid;
  for (double z : linspace(geom.I_in[0], geom.I_in[1], grid_spec.n_z)) {
    double lip = entry_lip(np, phi, eps, geom, z);
    for (double y : linspace(lip, geom.zeta_w, grid_spec.n_y)) grid.push_back({y, z});
  }
  std::vector<double> mins(grid.size(), 0.0);
  parallel_for(grid.size(), jobs, [&](size_t i) {
    Trajectory tr = map_point_trajectory(np, phi, eps, geom, grid[i][0], grid[i][1], cfg);
    double m = grid[i][0];
    for (size_t k = 0; k < tr.samples.size(); ++k) {
      m = std::min(m, tr.samples[k].second[1]);
      if (k + 1 < tr.samples.size())
        m = std::min(m, tr.state(0.5 * (tr.samples[k].first + tr.samples[k + 1].first))[1]);
    }
    mins[i] = m;
  });
  double dip = 0.0;
  for (double m : mins) dip = std::min(dip, m);
  return dip;
}

}  // namespace twofold
