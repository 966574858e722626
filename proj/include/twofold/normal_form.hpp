#pragma once

#include <string>

#include "twofold/core.hpp"
#include "twofold/params.hpp"
#include "twofold/pws.hpp"

namespace twofold {

// The two linear fields of the model:
//   X+ = (c/beta, b z, 1)        on y > 0
//   X- = (-1, -beta x, gamma/b)  on y < 0
// X+ has a visible fold on {y=z=0}, X- an invisible fold on {x=y=0}, and the
// origin is the two-fold where both tangencies meet.
inline Vec3 field(const NormalFormParams& np, Side side, const Vec3& p) {
  if (side == Side::Plus) return {np.c / np.beta, np.b * p[2], 1.0};
  return {-1.0, -np.beta * p[0], np.gamma / np.b};
}

inline Mat3 jacobian(const NormalFormParams& np, Side side) {
  Mat3 j{};
  if (side == Side::Plus) j[1][2] = np.b;
  else j[1][0] = -np.beta;
  return j;
}

inline PwsSystem make_pws_system(const NormalFormParams& np) {
  auto fp = [np](const Vec3& p) { return field(np, Side::Plus, p); };
  auto fm = [np](const Vec3& p) { return field(np, Side::Minus, p); };
  auto jp = [np](const Vec3&) { return jacobian(np, Side::Plus); };
  auto jm = [np](const Vec3&) { return jacobian(np, Side::Minus); };
  return make_pws_system(fp, fm, jp, jm);
}

struct AssumptionReport {
  bool holds;
  std::string diagnostic;  // first failing inequality, empty when holds
};

// Focus-free node condition for the desingularized sliding flow:
// (c-gamma)^2 - 4 b beta > 0 and c + gamma, c - gamma both exceed its root.
inline AssumptionReport check_assumption_A(const NormalFormParams& np) {
  np.validate();
  double d = sq(np.c - np.gamma) - 4.0 * np.b * np.beta;
  char buf[128];
  if (!(d > 0.0)) {
    std::snprintf(buf, sizeof buf, "discriminant = %g", d);
    return {false, buf};
  }
  double r = std::sqrt(d);
  if (!(np.c + np.gamma > r)) {
    std::snprintf(buf, sizeof buf, "c+gamma = %g <= sqrt(discriminant) = %g", np.c + np.gamma, r);
    return {false, buf};
  }
  if (!(np.c - np.gamma > r)) {
    std::snprintf(buf, sizeof buf, "c-gamma = %g <= sqrt(discriminant) = %g", np.c - np.gamma, r);
    return {false, buf};
  }
  return {true, ""};
}

struct EigenData {
  double lambda_plus;   // weak eigenvalue (closer to zero)
  double lambda_minus;  // strong eigenvalue
  double chi_plus;      // slope parameter of the weak direction
  double chi_minus;
  Vec2 v_plus;   // (1, -chi_plus)
  Vec2 v_minus;  // (1, -chi_minus)
  double xi;     // lambda_minus / lambda_plus, > 1
  int n;         // floor(xi)
  double z1_star;
  double discriminant;
};

inline EigenData eigen_data(const NormalFormParams& np) {
  AssumptionReport a = check_assumption_A(np);
  if (!a.holds) throw error(errc::assumption_a_violated, a.diagnostic);
  double d = sq(np.c - np.gamma) - 4.0 * np.b * np.beta;
  double r = std::sqrt(d);
  EigenData e;
  e.discriminant = d;
  e.lambda_plus = 0.5 * (-(np.c + np.gamma) + r);
  e.lambda_minus = 0.5 * (-(np.c + np.gamma) - r);
  e.chi_plus = -((np.c - np.gamma) + r) / (2.0 * np.b);
  e.chi_minus = -((np.c - np.gamma) - r) / (2.0 * np.b);
  e.v_plus = {1.0, -e.chi_plus};
  e.v_minus = {1.0, -e.chi_minus};
  e.xi = e.lambda_minus / e.lambda_plus;
  e.n = static_cast<int>(std::floor(e.xi));
  e.z1_star = -e.chi_plus + 2.0 * np.gamma / np.b;
  return e;
}

constexpr double kResonanceTol = 1e-3;

// Nonresonance of the node: the eigenvalue ratio must stay away from integers.
inline bool check_assumption_B(const NormalFormParams& np, double tau_int = kResonanceTol) {
  EigenData e = eigen_data(np);
  double frac = e.xi - std::floor(e.xi);
  return std::min(frac, 1.0 - frac) > tau_int;
}

// Exact flow of one linear side; polynomial in t.
inline Vec3 flow_exact(const NormalFormParams& np, Side side, const Vec3& p0, double t) {
  if (side == Side::Plus) {
    return {p0[0] + np.c / np.beta * t, p0[1] + np.b * (p0[2] * t + 0.5 * t * t), p0[2] + t};
  }
  return {p0[0] - t, p0[1] - np.beta * (p0[0] * t - 0.5 * t * t), p0[2] + np.gamma / np.b * t};
}

// First-return map of X- on the switching plane: (x,z) -> (-x, z + 2 gamma x / b).
// Fixes the invisible fold line {x=0} pointwise.
inline Vec2 return_map_vartheta(const NormalFormParams& np, const Vec2& xz) {
  if (xz[0] < 0.0) throw error(errc::negative_x, "return map needs x >= 0");
  return {-xz[0], xz[1] + 2.0 * np.gamma / np.b * xz[0]};
}

// The forward orbit of X+ emanating from the two-fold, parameterized by x.
inline Vec3 segment_U(const NormalFormParams& np, double r) {
  double k = np.beta / np.c;
  return {r, 0.5 * sq(r) * np.b * sq(k), r * k};
}

inline Vec3 u_out(const NormalFormParams& np, double nu) {
  double r = (np.c / np.beta) * std::sqrt(2.0 * nu / np.b);
  Vec3 u = segment_U(np, r);
  u[1] = nu;  // exact by construction, pinned against roundoff
  return u;
}

struct CanardLines {
  double strong_slope;  // line z = strong_slope * x, tangent to v_minus
  double weak_slope;    // line z = weak_slope * x, tangent to v_plus
};

inline CanardLines canard_lines(const NormalFormParams& np) {
  EigenData e = eigen_data(np);
  return {-e.chi_minus, -e.chi_plus};
}

// Open sector of the stable sliding quadrant bounded by the strong canard and
// the invisible fold line; every orbit inside reaches the two-fold tangent to
// the weak direction.
inline bool in_funnel(const NormalFormParams& np, double x, double z) {
  EigenData e = eigen_data(np);
  return x < 0.0 && z < -e.chi_minus * x;
}

enum class CaseKind { CaseA, CaseB };

inline const char* case_kind_name(CaseKind k) { return k == CaseKind::CaseA ? "a" : "b"; }

// Classifies an entry segment {x=-delta, z in I_in} by its position relative
// to the two canard lines combined with the parity of n. "Between" means
// between the weak and strong canard; the other legal position is below the
// weak canard (toward the invisible fold line).
inline CaseKind classify_case(const NormalFormParams& np, const Vec2& I_in, double delta) {
  EigenData e = eigen_data(np);
  double z_weak = e.chi_plus * delta;    // weak canard height at x = -delta
  double z_strong = e.chi_minus * delta; // strong canard height at x = -delta
  double lo = I_in[0], hi = I_in[1];
  if (!(lo <= hi)) throw error(errc::config_error, "I_in interval is reversed");
  if (!(hi < z_strong))
    throw error(errc::outside_funnel, "I_in is not inside the funnel at x = -delta");
  if (lo <= z_weak && z_weak <= hi)
    throw error(errc::straddles_weak_canard, "I_in contains the weak canard height");
  bool between = lo > z_weak;  // whole interval between the canard lines
  bool n_even = e.n % 2 == 0;
  if ((between && n_even) || (!between && !n_even)) return CaseKind::CaseA;
  return CaseKind::CaseB;
}

}  // namespace twofold
