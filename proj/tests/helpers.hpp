#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "twofold/core.hpp"
#include "twofold/params.hpp"

namespace tt {

// Runs fn and reports the error code it threw, if any.
template <class F>
std::optional<twofold::errc> thrown_code(F&& fn) {
  try {
    fn();
  } catch (const twofold::error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline double dist3(const twofold::Vec3& a, const twofold::Vec3& b) {
  return twofold::norm(twofold::Vec3{a[0] - b[0], a[1] - b[1], a[2] - b[2]});
}

inline double dist2(const twofold::Vec2& a, const twofold::Vec2& b) {
  return twofold::norm(twofold::Vec2{a[0] - b[0], a[1] - b[1]});
}

// Reference parameter sets used across the suite.
inline twofold::NormalFormParams params_a() { return {1.0, 1.0, 4.0, 1.0}; }
inline twofold::NormalFormParams params_b() { return {1.0, 1.0, 5.0, 2.0}; }
inline twofold::NormalFormParams params_stiff() { return {1.0, 0.9005, 1.0, -0.9}; }

}  // namespace tt
