#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace twofold {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;
using Mat2 = std::array<std::array<double, 2>, 2>;
using Mat3 = std::array<std::array<double, 3>, 3>;

enum class errc {
  point_off_sigma,
  not_sliding,
  degenerate_denominator,
  not_a_fold,
  assumption_a_violated,
  assumption_violated,
  negative_x,
  nonpositive_epsilon,
  out_of_range,
  out_of_domain,
  jacobian_mismatch,
  step_size_underflow,
  max_steps_exceeded,
  non_finite_state,
  chattering_limit,
  straddles_weak_canard,
  outside_funnel,
  escape_out_of_r_out,
  global_return_out_of_range,
  newton_diverged,
  non_converged_normalization,
  config_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::point_off_sigma: return "PointOffSigma";
    case errc::not_sliding: return "NotSliding";
    case errc::degenerate_denominator: return "DegenerateDenominator";
    case errc::not_a_fold: return "NotAFold";
    case errc::assumption_a_violated: return "AssumptionAViolated";
    case errc::assumption_violated: return "AssumptionViolated";
    case errc::negative_x: return "NegativeX";
    case errc::nonpositive_epsilon: return "NonpositiveEpsilon";
    case errc::out_of_range: return "OutOfRange";
    case errc::out_of_domain: return "OutOfDomain";
    case errc::jacobian_mismatch: return "JacobianMismatch";
    case errc::step_size_underflow: return "StepSizeUnderflow";
    case errc::max_steps_exceeded: return "MaxStepsExceeded";
    case errc::non_finite_state: return "NonFiniteState";
    case errc::chattering_limit: return "ChatteringLimit";
    case errc::straddles_weak_canard: return "StraddlesWeakCanard";
    case errc::outside_funnel: return "OutsideFunnel";
    case errc::escape_out_of_r_out: return "EscapeOutOfRout";
    case errc::global_return_out_of_range: return "GlobalReturnOutOfRange";
    case errc::newton_diverged: return "NewtonDiverged";
    case errc::non_converged_normalization: return "NonConvergedNormalization";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

inline double sq(double x) { return x * x; }

inline double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }
inline double norm(const Vec3& v) { return std::sqrt(sq(v[0]) + sq(v[1]) + sq(v[2])); }

inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

inline Vec2 mat_apply(const Mat2& m, const Vec2& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

// Largest singular value of a 2x2 matrix, in closed form.
inline double op_norm(const Mat2& a) {
  double g11 = sq(a[0][0]) + sq(a[0][1]);
  double g22 = sq(a[1][0]) + sq(a[1][1]);
  double g12 = a[0][0] * a[1][0] + a[0][1] * a[1][1];
  double tr = g11 + g22;
  double disc = std::sqrt(std::max(0.0, sq(g11 - g22) + 4.0 * sq(g12)));
  return std::sqrt(0.5 * (tr + disc));
}

// Moduli of the (possibly complex) eigenvalue pair of a 2x2 matrix.
inline std::array<double, 2> eig_moduli(const Mat2& a) {
  double tr = a[0][0] + a[1][1];
  double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  double disc = sq(tr) - 4.0 * det;
  if (disc >= 0.0) {
    double r = std::sqrt(disc);
    return {std::abs(0.5 * (tr + r)), std::abs(0.5 * (tr - r))};
  }
  double m = std::sqrt(std::abs(det));
  return {m, m};
}

// Acute angle between the lines spanned by u and v (sign-insensitive).
inline double line_angle(const Vec2& u, const Vec2& v) {
  double nu = norm(u), nv = norm(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  double cross = std::abs(u[0] * v[1] - u[1] * v[0]) / (nu * nv);
  return std::asin(std::min(1.0, cross));
}

inline bool all_finite(const Vec3& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

}  // namespace twofold
