#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "twofold/core.hpp"
#include "twofold/regularization.hpp"

namespace twofold {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_init = 1e-4;
  double h_min = -1.0;  // negative means: pick a context default
  double h_max = 0.5;
  long max_steps = 1000000;
  double event_tol = 1e-12;
};

inline IntegratorConfig resolve_config(IntegratorConfig cfg, double default_h_min) {
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0))
    throw error(errc::config_error, "tolerances must be positive");
  if (!(cfg.event_tol > 0.0)) throw error(errc::config_error, "event_tol must be positive");
  if (cfg.h_min < 0.0) cfg.h_min = default_h_min;
  if (!(cfg.h_min <= cfg.h_init && cfg.h_init <= cfg.h_max))
    throw error(errc::config_error, "need h_min <= h_init <= h_max");
  if (cfg.max_steps <= 0) throw error(errc::config_error, "max_steps must be positive");
  return cfg;
}

// --- generic embedded 5(4) pair with dense output ------------------------------

template <size_t N>
using StateN = std::array<double, N>;

template <size_t N>
struct DenseSeg {
  double t0, h;
  std::array<StateN<N>, 5> rc;

  StateN<N> eval(double t) const {
    double th = (t - t0) / h, th1 = 1.0 - th;
    StateN<N> y;
    for (size_t i = 0; i < N; ++i)
      y[i] = rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
    return y;
  }
};

template <size_t N>
struct EventSpec {
  std::function<double(double, const StateN<N>&)> g;
  int direction = 0;  // +1: - to +, -1: + to -, 0: either
  bool terminal = false;
  std::function<bool(double, const StateN<N>&)> accept;  // optional hit filter
};

enum class OdeStatus { ReachedEnd, TerminalEvent, BlowoutStop };

template <size_t N>
struct HitRec {
  double t;
  StateN<N> y;
  int event_index;
};

template <size_t N>
StateN<N> eval_dense(const std::vector<DenseSeg<N>>& segs, double t) {
  size_t lo = 0, hi = segs.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi + 1) / 2;
    if (segs[mid].t0 <= t) lo = mid;
    else hi = mid - 1;
  }
  return segs[lo].eval(t);
}

template <size_t N>
struct OdeResult {
  std::vector<std::pair<double, StateN<N>>> samples;
  std::vector<DenseSeg<N>> segs;  // contiguous; segs[i] valid on [t0, t0+h]
  std::vector<HitRec<N>> hits;
  OdeStatus status = OdeStatus::ReachedEnd;
  double t_end = 0.0;
  StateN<N> y_end{};
  long n_accepted = 0, n_rejected = 0;

  StateN<N> eval(double t) const { return segs.empty() ? y_end : eval_dense<N>(segs, t); }
};

namespace detail {

template <size_t N>
bool finite_state(const StateN<N>& y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

template <size_t N>
double linf(const StateN<N>& y) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return m;
}

// Locate a root of g on [ta,tb] given a sign transition, by the Illinois
// variant of regula falsi with a periodic bisection step so the bracket
// provably shrinks. ga and gb carry the endpoint values.
template <size_t N>
double illinois_root(const std::function<double(double, const StateN<N>&)>& g,
                     const DenseSeg<N>& seg, double ta, double tb, double ga, double gb,
                     double tol) {
  if (gb == 0.0) return tb;
  for (int it = 0; it < 200 && tb - ta > tol; ++it) {
    double tm;
    if (it % 4 == 3 || gb == ga) {
      tm = 0.5 * (ta + tb);
    } else {
      tm = tb - gb * (tb - ta) / (gb - ga);
      if (!(tm > ta && tm < tb)) tm = 0.5 * (ta + tb);
    }
    double gm = g(tm, seg.eval(tm));
    if (gm == 0.0) return tm;
    if ((gm < 0.0) == (ga < 0.0)) {
      ta = tm;
      ga = gm;
      gb *= 0.5;
    } else {
      tb = tm;
      gb = gm;
      ga *= 0.5;
    }
  }
  return 0.5 * (ta + tb);
}

}  // namespace detail

// Dormand-Prince 5(4) with first-same-as-last, PI-free step control and the
// standard quartic interpolant. Events are scanned on each accepted step's
// dense output over 8 subintervals, with direction filtering, and refined to
// cfg.event_tol in time. blowout_norm2 <= 0 disables the runaway guard.
template <size_t N, class RHS>
OdeResult<N> solve_dopri5(RHS&& rhs, const StateN<N>& y_start, double t0, double t1,
                          const IntegratorConfig& cfg, const std::vector<EventSpec<N>>& events,
                          double blowout_norm2 = 0.0, bool keep_dense = true) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  if (!(t1 > t0)) throw error(errc::config_error, "t_span must be increasing");
  if (!detail::finite_state<N>(y_start)) throw error(errc::non_finite_state, "initial state");

  OdeResult<N> out;
  out.samples.emplace_back(t0, y_start);

  std::vector<double> last_hit(events.size(), -std::numeric_limits<double>::infinity());
  const double y0_scale = 1.0 + detail::linf<N>(y_start);
  for (size_t i = 0; i < events.size(); ++i)
    if (std::abs(events[i].g(t0, y_start)) <= 1e-13 * y0_scale) last_hit[i] = t0;
  const double suppress_w = std::max(10.0 * cfg.event_tol, 1e-13);

  StateN<N> y = y_start;
  StateN<N> k1, k2, k3, k4, k5, k6, k7, yt, y1, err_v;
  rhs(t0, y, k1);
  if (!detail::finite_state<N>(k1)) throw error(errc::non_finite_state, "field at initial state");

  double t = t0;
  double h = std::min(cfg.h_init, t1 - t0);
  bool rejected_last = false;

  while (t < t1) {
    if (out.n_accepted + out.n_rejected >= cfg.max_steps)
      throw error(errc::max_steps_exceeded, "integration exceeded max_steps");
    bool sliver = false;
    if (h >= t1 - t) {
      h = t1 - t;
      sliver = true;  // the final partial step may be shorter than h_min
    }

    auto stage = [&](StateN<N>& kv, double cc, auto&&... terms) {
      for (size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        ((acc += terms.first * terms.second[i]), ...);
        yt[i] = y[i] + h * acc;
      }
      rhs(t + cc * h, yt, kv);
    };
    using P = std::pair<double, const StateN<N>&>;
    stage(k2, c2, P{a21, k1});
    stage(k3, c3, P{a31, k1}, P{a32, k2});
    stage(k4, c4, P{a41, k1}, P{a42, k2}, P{a43, k3});
    stage(k5, c5, P{a51, k1}, P{a52, k2}, P{a53, k3}, P{a54, k4});
    stage(k6, 1.0, P{a61, k1}, P{a62, k2}, P{a63, k3}, P{a64, k4}, P{a65, k5});
    for (size_t i = 0; i < N; ++i)
      y1[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(t + h, y1, k7);

    if (!detail::finite_state<N>(y1) || !detail::finite_state<N>(k7))
      throw error(errc::non_finite_state, "state became non-finite during a step");

    double err = 0.0;
    for (size_t i = 0; i < N; ++i) {
      err_v[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += sq(err_v[i] / sk);
    }
    err = std::sqrt(err / N);

    double fac = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0) : 10.0;
    if (err > 1.0) {
      ++out.n_rejected;
      if (h <= cfg.h_min * (1.0 + 1e-10) && !sliver)
        throw error(errc::step_size_underflow, "step control below h_min");
      h = sliver ? h * fac : std::max(h * fac, cfg.h_min);
      rejected_last = true;
      continue;
    }

    DenseSeg<N> seg;
    seg.t0 = t;
    seg.h = h;
    for (size_t i = 0; i < N; ++i) {
      double dy = y1[i] - y[i];
      seg.rc[0][i] = y[i];
      seg.rc[1][i] = dy;
      seg.rc[2][i] = h * k1[i] - dy;
      seg.rc[3][i] = dy - h * k7[i] - seg.rc[2][i];
      seg.rc[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                          d7 * k7[i]);
    }

    // event scan over this step
    double t_step_end = sliver ? t1 : t + h;
    struct Root {
      double t;
      int idx;
    };
    std::vector<Root> roots;
    for (size_t ei = 0; ei < events.size(); ++ei) {
      const auto& ev = events[ei];
      std::array<double, 9> gs;
      for (int j = 0; j <= 8; ++j) {
        double tj = t + h * (j / 8.0);
        gs[j] = ev.g(tj, j == 0 ? y : (j == 8 ? y1 : seg.eval(tj)));
      }
      for (int j = 0; j < 8; ++j) {
        double ga = gs[j], gb = gs[j + 1];
        bool up = ga < 0.0 && gb >= 0.0, dn = ga > 0.0 && gb <= 0.0;
        bool fire = ev.direction > 0 ? up : (ev.direction < 0 ? dn : (up || dn));
        if (!fire) continue;
        double ta = t + h * (j / 8.0), tb = t + h * ((j + 1) / 8.0);
        roots.push_back({detail::illinois_root<N>(ev.g, seg, ta, tb, ga, gb, cfg.event_tol),
                         static_cast<int>(ei)});
      }
    }
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.t < b.t; });

    bool terminated = false;
    double t_cut = t_step_end;
    for (const auto& r : roots) {
      if (r.t <= last_hit[r.idx] + suppress_w) continue;
      StateN<N> yr = seg.eval(r.t);
      const auto& ev = events[r.idx];
      if (ev.accept && !ev.accept(r.t, yr)) continue;
      last_hit[r.idx] = r.t;
      out.hits.push_back({r.t, yr, r.idx});
      if (ev.terminal) {
        terminated = true;
        t_cut = r.t;
        y1 = yr;
        break;
      }
    }

    ++out.n_accepted;
    if (keep_dense) out.segs.push_back(seg);
    out.samples.emplace_back(t_cut, y1);

    if (terminated) {
      out.status = OdeStatus::TerminalEvent;
      out.t_end = t_cut;
      out.y_end = y1;
      return out;
    }
    if (blowout_norm2 > 0.0) {
      double n2 = 0.0;
      for (double v : y1) n2 += v * v;
      if (n2 > blowout_norm2) {
        out.status = OdeStatus::BlowoutStop;
        out.t_end = t_cut;
        out.y_end = y1;
        return out;
      }
    }

    t = t_step_end;
    y = y1;
    k1 = k7;  // first same as last
    if (rejected_last) fac = std::min(fac, 1.0);
    rejected_last = false;
    h = std::clamp(h * fac, cfg.h_min, cfg.h_max);
  }

  out.status = OdeStatus::ReachedEnd;
  out.t_end = t1;
  out.y_end = y;
  return out;
}

// --- public 3D interface ---------------------------------------------------------

enum class SectionKind { PlaneX, PlaneY, PlaneZ };
enum class SectionDirection { Increasing, Decreasing, Either };

struct Rect {
  Vec2 lo, hi;  // in the two non-section coordinates, ascending index order
};

struct Section {
  SectionKind kind;
  double value = 0.0;
  SectionDirection direction = SectionDirection::Either;
  bool terminal = false;
  std::optional<Rect> bounds;
};

enum class EventKind {
  SectionHit,
  SigmaEntry,
  SlidingEntry,
  SlidingExit,
  CrossUp,
  CrossDown,
  TwoFoldHit,
  Blowout
};

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::SectionHit: return "SectionHit";
    case EventKind::SigmaEntry: return "SigmaEntry";
    case EventKind::SlidingEntry: return "SlidingEntry";
    case EventKind::SlidingExit: return "SlidingExit";
    case EventKind::CrossUp: return "CrossUp";
    case EventKind::CrossDown: return "CrossDown";
    case EventKind::TwoFoldHit: return "TwoFoldHit";
    case EventKind::Blowout: return "Blowout";
  }
  return "?";
}

struct Event {
  double t;
  EventKind kind;
  Vec3 state;
  int section = -1;  // index into the sections argument for SectionHit
};

enum class TrajStatus { ReachedEnd, TerminalEvent, BlowoutStop };

struct TrajPiece {
  double t0, t1;
  std::function<Vec3(double)> eval;
};

struct Trajectory {
  std::vector<std::pair<double, Vec3>> samples;
  std::vector<Event> events;
  std::vector<TrajPiece> pieces;
  TrajStatus status = TrajStatus::ReachedEnd;
  bool reached_two_fold = false;
  double t_end = 0.0;
  Vec3 y_end{};

  Vec3 state(double t) const {
    if (pieces.empty()) return y_end;
    double lo = pieces.front().t0, hi = pieces.back().t1;
    double slack = 1e-9 * (1.0 + std::abs(hi));
    if (t < lo - slack || t > hi + slack)
      throw error(errc::out_of_range, "time outside the computed trajectory");
    t = std::clamp(t, lo, hi);
    size_t a = 0, b = pieces.size() - 1;
    while (a < b) {
      size_t mid = (a + b + 1) / 2;
      if (pieces[mid].t0 <= t) a = mid;
      else b = mid - 1;
    }
    return pieces[a].eval(t);
  }
};

namespace detail {

inline int section_coord(SectionKind k) {
  return k == SectionKind::PlaneX ? 0 : (k == SectionKind::PlaneY ? 1 : 2);
}

inline EventSpec<3> section_event(const Section& s) {
  EventSpec<3> ev;
  int c = section_coord(s.kind);
  double v = s.value;
  ev.g = [c, v](double, const StateN<3>& y) { return y[static_cast<size_t>(c)] - v; };
  ev.direction = s.direction == SectionDirection::Increasing
                     ? 1
                     : (s.direction == SectionDirection::Decreasing ? -1 : 0);
  ev.terminal = s.terminal;
  if (s.bounds) {
    Rect r = *s.bounds;
    int u = c == 0 ? 1 : 0, w = c == 2 ? 1 : 2;
    ev.accept = [r, u, w](double, const StateN<3>& y) {
      return y[static_cast<size_t>(u)] >= r.lo[0] && y[static_cast<size_t>(u)] <= r.hi[0] &&
             y[static_cast<size_t>(w)] >= r.lo[1] && y[static_cast<size_t>(w)] <= r.hi[1];
    };
  }
  return ev;
}

inline Trajectory wrap_result(OdeResult<3>&& res) {
  Trajectory tr;
  tr.samples = std::move(res.samples);
  for (const auto& hrec : res.hits)
    tr.events.push_back({hrec.t, EventKind::SectionHit, hrec.y, hrec.event_index});
  tr.status = res.status == OdeStatus::ReachedEnd
                  ? TrajStatus::ReachedEnd
                  : (res.status == OdeStatus::TerminalEvent ? TrajStatus::TerminalEvent
                                                            : TrajStatus::BlowoutStop);
  if (res.status == OdeStatus::BlowoutStop)
    tr.events.push_back({res.t_end, EventKind::Blowout, res.y_end, -1});
  tr.t_end = res.t_end;
  tr.y_end = res.y_end;
  if (!res.segs.empty()) {
    auto segs = std::make_shared<std::vector<DenseSeg<3>>>(std::move(res.segs));
    tr.pieces.push_back({segs->front().t0, tr.t_end,
                         [segs](double t) { return eval_dense<3>(*segs, t); }});
  }
  return tr;
}

}  // namespace detail

using Field3 = std::function<Vec3(const Vec3&)>;

inline Trajectory integrate(const Field3& field, const Vec3& p0, double t0, double t1,
                            const IntegratorConfig& cfg_in, const std::vector<Section>& sections,
                            double blowout_radius = 1e6) {
  IntegratorConfig cfg = resolve_config(cfg_in, 1e-13);
  std::vector<EventSpec<3>> evs;
  evs.reserve(sections.size());
  for (const auto& s : sections) evs.push_back(detail::section_event(s));
  auto rhs = [&field](double, const StateN<3>& y, StateN<3>& dy) { dy = field(y); };
  auto res = solve_dopri5<3>(rhs, p0, t0, t1, cfg, evs, blowout_radius * blowout_radius);
  return detail::wrap_result(std::move(res));
}

inline Trajectory integrate_regularized(const NormalFormParams& np, const RegularizationFn& phi,
                                        double eps, const Vec3& p0, double t0, double t1,
                                        const IntegratorConfig& cfg_in,
                                        const std::vector<Section>& sections) {
  if (!(eps > 0.0)) throw error(errc::nonpositive_epsilon, "eps must be positive");
  IntegratorConfig cfg = resolve_config(cfg_in, eps * 1e-4);
  std::vector<EventSpec<3>> evs;
  evs.reserve(sections.size());
  for (const auto& s : sections) evs.push_back(detail::section_event(s));
  auto rhs = [&np, &phi, eps](double, const StateN<3>& y, StateN<3>& dy) {
    dy = regularized_field(np, phi, eps, y);
  };
  auto res = solve_dopri5<3>(rhs, p0, t0, t1, cfg, evs, 1e12);
  return detail::wrap_result(std::move(res));
}

}  // namespace twofold
