#pragma once

#include <functional>
#include <vector>

#include "twofold/core.hpp"
#include "twofold/params.hpp"

namespace twofold {

enum class Side { Plus, Minus };

// A piecewise-smooth system on R^3 split by the plane {y=0}. Fields and
// Jacobians are user-supplied callables; the switching function is f(x,y,z)=y,
// so Lie derivatives of f reduce to y-components.
struct PwsSystem {
  std::function<Vec3(const Vec3&)> x_plus;
  std::function<Vec3(const Vec3&)> x_minus;
  std::function<Mat3(const Vec3&)> jac_plus;
  std::function<Mat3(const Vec3&)> jac_minus;
  Vec3 box_lo{-10.0, -10.0, -10.0};
  Vec3 box_hi{10.0, 10.0, 10.0};

  const std::function<Vec3(const Vec3&)>& field(Side s) const {
    return s == Side::Plus ? x_plus : x_minus;
  }
  const std::function<Mat3(const Vec3&)>& jacobian(Side s) const {
    return s == Side::Plus ? jac_plus : jac_minus;
  }
};

inline Mat3 fd_jacobian3(const std::function<Vec3(const Vec3&)>& f, const Vec3& p) {
  Mat3 j{};
  for (int col = 0; col < 3; ++col) {
    double h = 1e-6 * std::max(1.0, std::abs(p[col]));
    Vec3 pp = p, pm = p;
    pp[col] += h;
    pm[col] -= h;
    Vec3 fp = f(pp), fm = f(pm);
    for (int row = 0; row < 3; ++row) j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
  }
  return j;
}

namespace detail {
inline void check_jacobian_consistency(const PwsSystem& sys) {
  std::vector<Vec3> pts;
  Vec3 mid{0.5 * (sys.box_lo[0] + sys.box_hi[0]), 0.5 * (sys.box_lo[1] + sys.box_hi[1]),
           0.5 * (sys.box_lo[2] + sys.box_hi[2])};
  pts.push_back(mid);
  for (int corner = 0; corner < 8; ++corner) {
    Vec3 p;
    for (int i = 0; i < 3; ++i) {
      double lo = sys.box_lo[i], hi = sys.box_hi[i];
      // stay slightly inside so central differences sample valid points
      p[i] = (corner >> i) & 1 ? lo + 0.9 * (hi - lo) : lo + 0.1 * (hi - lo);
    }
    pts.push_back(p);
  }
  for (Side s : {Side::Plus, Side::Minus}) {
    for (const Vec3& p : pts) {
      if (!all_finite(sys.field(s)(p)))
        throw error(errc::non_finite_state, "field not finite on bounding box");
      Mat3 j = sys.jacobian(s)(p);
      Mat3 fd = fd_jacobian3(sys.field(s), p);
      double scale = 1.0, diff = 0.0;
      for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col) {
          scale = std::max(scale, std::abs(j[r][col]));
          diff = std::max(diff, std::abs(j[r][col] - fd[r][col]));
        }
      if (diff > 1e-6 * scale)
        throw error(errc::jacobian_mismatch, "supplied Jacobian disagrees with finite differences");
    }
  }
}
}  // namespace detail

inline PwsSystem make_pws_system(std::function<Vec3(const Vec3&)> fp,
                                 std::function<Vec3(const Vec3&)> fm,
                                 std::function<Mat3(const Vec3&)> jp,
                                 std::function<Mat3(const Vec3&)> jm,
                                 Vec3 box_lo = {-10, -10, -10}, Vec3 box_hi = {10, 10, 10}) {
  PwsSystem sys{std::move(fp), std::move(fm), std::move(jp), std::move(jm), box_lo, box_hi};
  detail::check_jacobian_consistency(sys);
  return sys;
}

// Finite-difference fallback when no Jacobians are supplied.
inline PwsSystem make_pws_system(std::function<Vec3(const Vec3&)> fp,
                                 std::function<Vec3(const Vec3&)> fm,
                                 Vec3 box_lo = {-10, -10, -10}, Vec3 box_hi = {10, 10, 10}) {
  auto jp = [fp](const Vec3& p) { return fd_jacobian3(fp, p); };
  auto jm = [fm](const Vec3& p) { return fd_jacobian3(fm, p); };
  return PwsSystem{std::move(fp), std::move(fm), jp, jm, box_lo, box_hi};
}

constexpr double kTangencyTol = 1e-9;

// Lie derivative of the switching function along one side; equals that
// field's y-component.
inline double lie_derivative(const PwsSystem& sys, Side side, const Vec3& p) {
  return sys.field(side)(p)[1];
}

enum class SigmaKind {
  CrossingUp,
  CrossingDown,
  SlidingStable,
  SlidingUnstable,
  TangencyPlus,
  TangencyMinus,
  TwoFold,
};

inline const char* sigma_kind_name(SigmaKind k) {
  switch (k) {
    case SigmaKind::CrossingUp: return "CrossingUp";
    case SigmaKind::CrossingDown: return "CrossingDown";
    case SigmaKind::SlidingStable: return "SlidingStable";
    case SigmaKind::SlidingUnstable: return "SlidingUnstable";
    case SigmaKind::TangencyPlus: return "TangencyPlus";
    case SigmaKind::TangencyMinus: return "TangencyMinus";
    case SigmaKind::TwoFold: return "TwoFold";
  }
  return "?";
}

struct SigmaClassification {
  SigmaKind kind;
  double lie_plus;
  double lie_minus;
};

// Pointwise classification on the switching plane. Tangency takes precedence
// inside the tolerance band so the result is deterministic near fold lines.
inline SigmaClassification classify_sigma_point(const PwsSystem& sys, const Vec3& p,
                                                double tau_tan = kTangencyTol) {
  if (std::abs(p[1]) > tau_tan)
    throw error(errc::point_off_sigma, "point is not on the switching plane");
  double lp = lie_derivative(sys, Side::Plus, p);
  double lm = lie_derivative(sys, Side::Minus, p);
  bool zp = std::abs(lp) <= tau_tan;
  bool zm = std::abs(lm) <= tau_tan;
  SigmaKind kind;
  if (zp && zm) kind = SigmaKind::TwoFold;
  else if (zp) kind = SigmaKind::TangencyPlus;
  else if (zm) kind = SigmaKind::TangencyMinus;
  else if (lp * lm > 0.0) kind = lp > 0.0 ? SigmaKind::CrossingUp : SigmaKind::CrossingDown;
  else kind = (lm > 0.0 && lp < 0.0) ? SigmaKind::SlidingStable : SigmaKind::SlidingUnstable;
  return {kind, lp, lm};
}

// Convex-combination coefficient of the sliding field: sigma = X-f / (X-f - X+f).
inline double sliding_coefficient(const PwsSystem& sys, const Vec3& p,
                                  double tau_tan = kTangencyTol) {
  SigmaClassification cl = classify_sigma_point(sys, p, tau_tan);
  if (cl.kind != SigmaKind::SlidingStable && cl.kind != SigmaKind::SlidingUnstable)
    throw error(errc::not_sliding, "point is not in a sliding region");
  double den = cl.lie_minus - cl.lie_plus;
  if (std::abs(den) < tau_tan)
    throw error(errc::degenerate_denominator, "Lie derivatives nearly equal");
  return cl.lie_minus / den;
}

inline Vec3 filippov_sliding_field(const PwsSystem& sys, const Vec3& p,
                                   double tau_tan = kTangencyTol) {
  double s = sliding_coefficient(sys, p, tau_tan);
  Vec3 fp = sys.x_plus(p), fm = sys.x_minus(p);
  return {s * fp[0] + (1.0 - s) * fm[0], s * fp[1] + (1.0 - s) * fm[1],
          s * fp[2] + (1.0 - s) * fm[2]};
}

// Sliding field rescaled by (X-f - X+f), which removes the two-fold
// singularity. On the stable sliding quadrant this is a positive rescaling of
// the projected Filippov field; on the unstable quadrant the factor is
// negative, so orbits there are traversed in reversed time.
inline Vec2 desingularized_sliding_field(const NormalFormParams& np, double x, double z) {
  return {-np.c * x + np.b * z, -np.beta * x - np.gamma * z};
}

enum class FoldType { Visible, Invisible };

inline FoldType classify_fold(const PwsSystem& sys, const Vec3& q, Side side,
                              double tau_tan = kTangencyTol) {
  double l_own = lie_derivative(sys, side, q);
  double l_other = lie_derivative(sys, side == Side::Plus ? Side::Minus : Side::Plus, q);
  if (std::abs(l_own) > tau_tan)
    throw error(errc::not_a_fold, "field is not tangent at this point");
  if (std::abs(l_other) <= tau_tan)
    throw error(errc::not_a_fold, "both fields tangent (two-fold)");
  Vec3 f = sys.field(side)(q);
  Mat3 j = sys.jacobian(side)(q);
  double second = j[1][0] * f[0] + j[1][1] * f[1] + j[1][2] * f[2];
  if (std::abs(second) <= tau_tan)
    throw error(errc::not_a_fold, "second Lie derivative vanishes");
  bool visible = side == Side::Plus ? second > 0.0 : second < 0.0;
  return visible ? FoldType::Visible : FoldType::Invisible;
}

}  // namespace twofold
