#pragma once

#include <array>

#include "twofold/core.hpp"

namespace twofold {

// Coordinate charts used around the switching layer and the blowup of the
// two-fold. Cartesian reference coordinates are (x, y, z, eps).
//
//   Ebar1  (x, yhat, z, eps)   y = eps*yhat, the zoomed layer chart
//   Ybar1  (x, y, z, epshat)   eps = y*epshat, directional in y > 0
//   YbarM1 (x, y, z, epshat)   eps = y*epshat, directional in y < 0 (epshat <= 0)
//   K1     (r1, eps1, z1, yhat)  x = -r1,    eps = r1^2 eps1, z = r1 z1
//   K2     (x2, z2, r2, yhat)    x = r2 x2,  eps = r2^2,      z = r2 z2
//   K3     (r3, eps3, z3, yhat)  x = r3,     eps = r3^2 eps3, z = r3 z3
//
// The K charts inflate (x, eps, z) with weights (1, 2, 1) and carry yhat along.
enum class Chart { Ebar1, Ybar1, YbarM1, K1, K2, K3 };

inline const char* chart_name(Chart c) {
  switch (c) {
    case Chart::Ebar1: return "Ebar1";
    case Chart::Ybar1: return "Ybar1";
    case Chart::YbarM1: return "YbarM1";
    case Chart::K1: return "K1";
    case Chart::K2: return "K2";
    case Chart::K3: return "K3";
  }
  return "?";
}

struct ChartPoint {
  Chart chart;
  std::array<double, 4> coords;
};

using Cartesian4 = std::array<double, 4>;  // (x, y, z, eps)

inline Cartesian4 to_cartesian(const ChartPoint& p) {
  const auto& q = p.coords;
  switch (p.chart) {
    case Chart::Ebar1: {
      double eps = q[3];
      if (eps < 0.0) throw error(errc::out_of_domain, "Ebar1 needs eps >= 0");
      return {q[0], eps * q[1], q[2], eps};
    }
    case Chart::Ybar1: {
      if (!(q[1] > 0.0)) throw error(errc::out_of_domain, "Ybar1 needs y > 0");
      return {q[0], q[1], q[2], q[1] * q[3]};
    }
    case Chart::YbarM1: {
      if (!(q[1] < 0.0)) throw error(errc::out_of_domain, "YbarM1 needs y < 0");
      if (q[3] > 0.0) throw error(errc::out_of_domain, "YbarM1 needs epshat <= 0");
      return {q[0], q[1], q[2], q[1] * q[3]};
    }
    case Chart::K1: {
      double r = q[0];
      if (r < 0.0) throw error(errc::out_of_domain, "K1 needs r1 >= 0");
      double eps = r * r * q[1];
      return {-r, eps * q[3], r * q[2], eps};
    }
    case Chart::K2: {
      double r = q[2];
      if (r < 0.0) throw error(errc::out_of_domain, "K2 needs r2 >= 0");
      double eps = r * r;
      return {r * q[0], eps * q[3], r * q[1], eps};
    }
    case Chart::K3: {
      double r = q[0];
      if (r < 0.0) throw error(errc::out_of_domain, "K3 needs r3 >= 0");
      double eps = r * r * q[1];
      return {r, eps * q[3], r * q[2], eps};
    }
  }
  throw error(errc::out_of_domain, "unknown chart");
}

inline ChartPoint from_cartesian(const Cartesian4& c, Chart target) {
  double x = c[0], y = c[1], z = c[2], eps = c[3];
  switch (target) {
    case Chart::Ebar1: {
      if (!(eps > 0.0)) throw error(errc::out_of_domain, "Ebar1 inverse needs eps > 0");
      return {target, {x, y / eps, z, eps}};
    }
    case Chart::Ybar1: {
      if (!(y > 0.0)) throw error(errc::out_of_domain, "Ybar1 inverse needs y > 0");
      return {target, {x, y, z, eps / y}};
    }
    case Chart::YbarM1: {
      if (!(y < 0.0)) throw error(errc::out_of_domain, "YbarM1 inverse needs y < 0");
      if (eps < 0.0) throw error(errc::out_of_domain, "YbarM1 inverse needs eps >= 0");
      return {target, {x, y, z, eps / y}};
    }
    case Chart::K1: {
      if (!(x < 0.0)) throw error(errc::out_of_domain, "K1 inverse needs x < 0");
      if (!(eps > 0.0)) throw error(errc::out_of_domain, "K1 inverse needs eps > 0");
      double r = -x;
      return {target, {r, eps / (r * r), z / r, y / eps}};
    }
    case Chart::K2: {
      if (!(eps > 0.0)) throw error(errc::out_of_domain, "K2 inverse needs eps > 0");
      double r = std::sqrt(eps);
      return {target, {x / r, z / r, r, y / eps}};
    }
    case Chart::K3: {
      if (!(x > 0.0)) throw error(errc::out_of_domain, "K3 inverse needs x > 0");
      if (!(eps > 0.0)) throw error(errc::out_of_domain, "K3 inverse needs eps > 0");
      return {target, {x, eps / (x * x), z / x, y / eps}};
    }
  }
  throw error(errc::out_of_domain, "unknown chart");
}

inline ChartPoint chart_transform(const ChartPoint& p, Chart target) {
  if (p.chart == target) return p;
  return from_cartesian(to_cartesian(p), target);
}

}  // namespace twofold
