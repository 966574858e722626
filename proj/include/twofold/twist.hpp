#pragma once

#include "twofold/normal_form.hpp"
#include "twofold/ode.hpp"
#include "twofold/regularization.hpp"

namespace twofold {

struct TwistResult {
  double xi = 0.0;
  int n = 0;
  double mu = 0.0;
  Vec3 varpi_in{};
  Vec3 varpi_out{};
  Vec3 varpi_out_normalized{};
  int zeta_sign = 0;
  double weber_residual = 0.0;
};

namespace detail {

// Integrate a linear planar system over [s0, s1] in `chunks` pieces,
// renormalizing the state between pieces and accumulating the log of the
// stripped magnitude. Keeps the direction exact while the true solution
// spans hundreds of orders of magnitude.
template <class RHS>
std::pair<Vec2, double> renormalized_sweep(RHS&& rhs, Vec2 w0, double s0, double s1, int chunks,
                                           const IntegratorConfig& cfg) {
  double log_mag = 0.0;
  Vec2 w = w0;
  for (int k = 0; k < chunks; ++k) {
    double a = s0 + (s1 - s0) * k / chunks;
    double b = s0 + (s1 - s0) * (k + 1) / chunks;
    auto res = solve_dopri5<2>(rhs, StateN<2>{w[0], w[1]}, a, b, cfg, {}, 0.0, false);
    w = {res.y_end[0], res.y_end[1]};
    double m = norm(w);
    if (!(m > 0.0) || !std::isfinite(m))
      throw error(errc::non_converged_normalization, "variational state collapsed");
    w = {w[0] / m, w[1] / m};
    log_mag += std::log(m);
  }
  return {w, log_mag};
}

}  // namespace detail

// Tangent dynamics along the weak canard in the scaled variables, integrated
// across the full passage and renormalized chunkwise. The sign of the
// resulting u-component is the twist sign; a parabolic-cylinder reduction of
// the same system provides an independent residual check.
inline TwistResult variational_twist(const NormalFormParams& np, const RegularizationFn& phi,
                                     double mu, const IntegratorConfig& cfg_in) {
  if (!(mu > 0.0 && mu <= 0.2)) throw error(errc::config_error, "mu must be in (0, 0.2]");
  AssumptionReport a_rep = check_assumption_A(np);
  if (!a_rep.holds) throw error(errc::assumption_violated, a_rep.diagnostic);
  if (!check_assumption_B(np))
    throw error(errc::assumption_violated, "eigenvalue ratio too close to an integer");
  IntegratorConfig cfg = resolve_config(cfg_in, 1e-13);

  EigenData ed = eigen_data(np);
  double b = np.b, beta = np.beta;
  double lam_p = ed.lambda_plus, lam_m = ed.lambda_minus;
  double slope = 1.0 - b * ed.chi_plus / beta;  // 1 - beta^-1 b chi_+
  double arg = (1.0 + b * ed.chi_plus / beta) / slope;
  double dphi = phi.deriv(arg);
  if (!(dphi > 0.0))
    throw error(errc::assumption_violated, "switching profile is flat at the weak-canard height");
  double psi = 0.5 * beta * slope * slope * dphi;

  double u0 = (2.0 * b / (beta * slope * dphi)) * mu;
  double v0 = 1.0;
  double span = 1.0 / mu;

  auto rhs = [lam_p, lam_m, psi, b, beta](double x2, const StateN<2>& w, StateN<2>& dw) {
    dw[0] = -(beta / lam_p) * (psi * w[0] * x2 + b * w[1]);
    dw[1] = -(lam_m / (b * lam_p)) * psi * w[0];
  };
  auto [dir, log_mag] = detail::renormalized_sweep(rhs, Vec2{u0, v0}, -span, span, 200, cfg);

  TwistResult out;
  out.xi = ed.xi;
  out.n = ed.n;
  out.mu = mu;
  out.varpi_in = {0.0, u0, v0};
  if (log_mag < std::log(1e-30))
    throw error(errc::non_converged_normalization, "variational output underflowed");
  double mag = std::exp(std::min(log_mag, 700.0));
  out.varpi_out = {0.0, dir[0] * mag, dir[1] * mag};
  out.varpi_out_normalized = {0.0, dir[0], dir[1]};
  out.zeta_sign = dir[0] >= 0.0 ? 1 : -1;

  // independent route: eliminate u, rescale the independent variable, and
  // integrate (v, v') of v'' = xbar v' - xi v; then recover u from v'
  double acoef = std::sqrt(-psi * beta / lam_p);
  double xi = ed.xi;
  auto weber_rhs = [xi](double xbar, const StateN<2>& w, StateN<2>& dw) {
    dw[0] = w[1];
    dw[1] = xbar * w[1] - xi * w[0];
  };
  double w0 = -(lam_m * psi * u0) / (b * lam_p * acoef);
  auto [wdir, wlog] = detail::renormalized_sweep(weber_rhs, Vec2{v0, w0}, -acoef * span,
                                                 acoef * span, 200, cfg);
  (void)wlog;
  double u_w = -(b * lam_p * acoef * wdir[1]) / (lam_m * psi);
  double v_w = wdir[0];
  double mw = std::hypot(u_w, v_w);
  if (!(mw > 0.0))
    throw error(errc::non_converged_normalization, "cross-check state collapsed");
  Vec2 n1{dir[0], dir[1]};
  Vec2 n2{u_w / mw, v_w / mw};
  double s = dot(n1, n2) >= 0.0 ? 1.0 : -1.0;
  out.weber_residual = norm(n1 - s * n2);
  return out;
}

}  // namespace twofold
