#pragma once

#include <numbers>
#include <string>

#include "twofold/core.hpp"
#include "twofold/normal_form.hpp"

namespace twofold {

inline constexpr double kPi = std::numbers::pi;

// --- arctan family -----------------------------------------------------------

inline double phi_arctan(double s) { return (2.0 / kPi) * std::atan(s); }
inline double phi_arctan_deriv(double s) { return (2.0 / kPi) / (1.0 + s * s); }
inline double phi_arctan_inverse(double u) { return std::tan(0.5 * kPi * u); }

// Tail coefficient of the large-argument expansion
//   phi(s) = 1 - (2/pi) s^-1 (1 + phi2(s^-2)),  s > 0,
// with phi2(v) = atan(sqrt v)/sqrt v - 1. Series near zero keeps it stable.
inline double phi_arctan_tail(double v) {
  if (v < 1e-4) return v * (-1.0 / 3.0 + v * (1.0 / 5.0 + v * (-1.0 / 7.0 + v / 9.0)));
  double r = std::sqrt(v);
  return std::atan(r) / r - 1.0;
}

// --- clamped-cubic family (finite deformation) --------------------------------

inline double phi_st(double s) {
  if (s >= 1.0) return 1.0;
  if (s <= -1.0) return -1.0;
  return 0.5 * (3.0 * s - s * s * s);
}
inline double phi_st_deriv(double s) {
  if (s >= 1.0 || s <= -1.0) return 0.0;
  return 1.5 * (1.0 - s * s);
}
inline double phi_st_inverse(double u) { return 2.0 * std::sin(std::asin(u) / 3.0); }

enum class PhiFamily { Arctan, SotomayorTeixeira };

// A monotone switching profile: odd, valued in [-1,1], with its derivative,
// its inverse on the open range, and (arctan only) the tail coefficient.
struct RegularizationFn {
  PhiFamily family;
  double (*eval)(double);
  double (*deriv)(double);
  double (*inverse)(double);
  double (*tail_phi2)(double);  // nullptr unless the family has a known tail
};

inline RegularizationFn make_arctan_phi() {
  return {PhiFamily::Arctan, &phi_arctan, &phi_arctan_deriv, &phi_arctan_inverse,
          &phi_arctan_tail};
}
inline RegularizationFn make_st_phi() {
  return {PhiFamily::SotomayorTeixeira, &phi_st, &phi_st_deriv, &phi_st_inverse, nullptr};
}

inline RegularizationFn make_phi(const std::string& family) {
  if (family == "arctan") return make_arctan_phi();
  if (family == "st-cubic") return make_st_phi();
  throw error(errc::config_error, "unknown phi.family '" + family + "' (use arctan or st-cubic)");
}

inline const char* phi_family_name(PhiFamily f) {
  return f == PhiFamily::Arctan ? "arctan" : "st-cubic";
}

// --- regularized field ---------------------------------------------------------

// Smooth interpolation of the two sides. The time variable carries a factor 2
// relative to the piecewise system: far above the layer the field tends to
// 2 X+, far below to 2 X-.
inline Vec3 regularized_field(const NormalFormParams& np, const RegularizationFn& phi,
                              double eps, const Vec3& p) {
  if (!(eps > 0.0)) throw error(errc::nonpositive_epsilon, "eps must be positive");
  double ph = phi.eval(p[1] / eps);
  double up = 1.0 + ph, dn = 1.0 - ph;
  return {np.c / np.beta * up - dn, np.b * p[2] * up - np.beta * p[0] * dn,
          up + np.gamma / np.b * dn};
}

inline Mat3 regularized_jacobian(const NormalFormParams& np, const RegularizationFn& phi,
                                 double eps, const Vec3& p) {
  if (!(eps > 0.0)) throw error(errc::nonpositive_epsilon, "eps must be positive");
  double ph = phi.eval(p[1] / eps);
  double dph = phi.deriv(p[1] / eps) / eps;
  Mat3 j{};
  j[0][1] = (np.c / np.beta + 1.0) * dph;
  j[1][0] = -np.beta * (1.0 - ph);
  j[1][1] = (np.b * p[2] + np.beta * p[0]) * dph;
  j[1][2] = np.b * (1.0 + ph);
  j[2][1] = (1.0 - np.gamma / np.b) * dph;
  return j;
}

// The field commutes with (t,x,y,z) -> (-t,-x,y,-z); as a field identity,
// F(R p) = (F1, -F2, F3)(p) where R(x,y,z) = (-x, y, -z).
inline Vec3 reversibility_conjugate(const Vec3& p) { return {-p[0], p[1], -p[2]}; }

enum class Timescale { Fast, Slow };

// The zoomed chart y = eps*yhat. On the fast timescale (x, z) move at O(eps)
// while yhat relaxes at O(1); eps = 0 is the layer problem. The slow form
// divides the fast one by eps and reproduces the regularized field at eps = 1.
inline Vec3 slow_fast_rhs(const NormalFormParams& np, const RegularizationFn& phi,
                          const Vec3& xyz_hat, double eps, Timescale ts) {
  double x = xyz_hat[0], yhat = xyz_hat[1], z = xyz_hat[2];
  double ph = phi.eval(yhat);
  double up = 1.0 + ph, dn = 1.0 - ph;
  double g1 = np.c / np.beta * up - dn;
  double layer = np.b * z * up - np.beta * x * dn;
  double g3 = up + np.gamma / np.b * dn;
  if (ts == Timescale::Fast) return {eps * g1, layer, eps * g3};
  if (!(eps > 0.0)) throw error(errc::nonpositive_epsilon, "slow timescale needs eps > 0");
  return {g1, layer / eps, g3};
}

// Height yhat = h(s) of the critical manifold over s = z/x > 0, obtained by
// solving the layer problem: phi(h) = (1 - b s / beta) / (1 + b s / beta).
inline double critical_manifold_h(const NormalFormParams& np, const RegularizationFn& phi,
                                  double s) {
  if (!(s > 0.0)) throw error(errc::out_of_range, "critical manifold needs s = z/x > 0");
  double w = np.b * s / np.beta;
  double arg = (1.0 - w) / (1.0 + w);
  if (!(arg > -1.0 && arg < 1.0))
    throw error(errc::out_of_range, "argument outside the open range of phi");
  return phi.inverse(arg);
}

enum class LayerStability { Attracting, Repelling };

struct LayerStabilityResult {
  LayerStability kind;
  double rate;  // d/dyhat of the layer field on the critical graph
};

inline LayerStabilityResult layer_stability(const NormalFormParams& np,
                                            const RegularizationFn& phi, double x, double z) {
  if (!(x * z > 0.0)) throw error(errc::not_sliding, "(x,z) must be in a sliding quadrant");
  double h = critical_manifold_h(np, phi, z / x);
  double rate = phi.deriv(h) * (np.b * z + np.beta * x);
  return {rate < 0.0 ? LayerStability::Attracting : LayerStability::Repelling, rate};
}

}  // namespace twofold
