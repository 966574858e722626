#pragma once

#include <memory>
#include <vector>

#include "twofold/normal_form.hpp"
#include "twofold/ode.hpp"
#include "twofold/pws.hpp"

namespace twofold {

struct HybridOptions {
  double tau_q = 1e-8;        // two-fold proximity radius in (x, z)
  long n_switch = 100000;     // regime-change budget
  double blowout_radius = 1e6;
  double tau_tan = 1e-9;      // tangency tolerance for Lie derivatives
  double desing_tau_max = 1e4;  // budget in desingularized time per sliding arc
};

namespace detail {

enum class Regime { Plus, Minus, Slide };

// Decide where an orbit continues from a point on the switching plane.
// Definite Lie-derivative signs give crossing or sliding; otherwise one field
// is tangent. X+ has y'' = b > 0 and X- has y'' = beta > 0 along their
// tangencies, so a tangent side curves back up; the rules below follow that.
inline Regime liftoff_regime(double lp, double lm, double tau) {
  if (lp > tau && lm > tau) return Regime::Plus;
  if (lp < -tau && lm < -tau) return Regime::Minus;
  if (lp < -tau && lm > tau) return Regime::Slide;
  if (lp > tau && lm < -tau) return Regime::Slide;  // repelling sliding
  if (lm > tau) return Regime::Plus;
  if (lm < -tau) return Regime::Minus;
  if (lp > tau) return Regime::Plus;
  if (lp < -tau) return Regime::Slide;
  return Regime::Plus;
}

}  // namespace detail

// Forward Filippov evolution: smooth arcs of X+/X- stopping on the switching
// plane, crossings by sign agreement of the Lie derivatives, and sliding arcs
// of the desingularized planar field in the sliding quadrants (time reversed
// in the repelling quadrant, with physical time recovered from the
// normalization factor). Reaching the two-fold ends the run with
// reached_two_fold set: continuation there is not unique and no selection is
// made.
inline Trajectory integrate_hybrid_filippov(const PwsSystem& sys, const NormalFormParams& np,
                                            const Vec3& p0, double t_max,
                                            const IntegratorConfig& cfg_in,
                                            const HybridOptions& opt = {}) {
  IntegratorConfig cfg = resolve_config(cfg_in, 1e-13);
  if (!(t_max > 0.0)) throw error(errc::config_error, "t_max must be positive");
  if (std::abs(p0[1]) <= opt.tau_tan && sq(p0[0]) + sq(p0[2]) <= sq(opt.tau_q))
    throw error(errc::config_error, "initial point is the two-fold");

  Trajectory tr;
  tr.samples.emplace_back(0.0, p0);

  double t = 0.0;
  Vec3 p = p0;
  long switches = 0;
  detail::Regime reg;
  bool done = false;

  auto count_switch = [&]() {
    if (++switches > opt.n_switch)
      throw error(errc::chattering_limit, "regime changes exceeded n_switch");
  };

  auto append_samples = [&](const auto& samples) {
    for (size_t i = 1; i < samples.size(); ++i)
      tr.samples.emplace_back(samples[i].first, samples[i].second);
  };

  // classify a point sitting exactly on the plane and pick the next regime;
  // returns false when the run ends at the two-fold
  auto resolve_on_sigma = [&](bool emit_cross, detail::Regime came_from) -> bool {
    if (sq(p[0]) + sq(p[2]) <= sq(opt.tau_q)) {
      tr.events.push_back({t, EventKind::TwoFoldHit, p, -1});
      tr.reached_two_fold = true;
      tr.status = TrajStatus::TerminalEvent;
      done = true;
      return false;
    }
    double lp = lie_derivative(sys, Side::Plus, p);
    double lm = lie_derivative(sys, Side::Minus, p);
    reg = detail::liftoff_regime(lp, lm, opt.tau_tan);
    if (reg == detail::Regime::Slide) {
      tr.events.push_back({t, EventKind::SlidingEntry, p, -1});
    } else if (emit_cross && reg != came_from) {
      tr.events.push_back(
          {t, reg == detail::Regime::Plus ? EventKind::CrossUp : EventKind::CrossDown, p, -1});
    }
    return true;
  };

  // initial regime
  if (p[1] > opt.tau_tan) {
    reg = detail::Regime::Plus;
  } else if (p[1] < -opt.tau_tan) {
    reg = detail::Regime::Minus;
  } else {
    p[1] = 0.0;
    resolve_on_sigma(false, detail::Regime::Plus);
  }

  while (!done && t < t_max) {
    if (reg != detail::Regime::Slide) {
      Side side = reg == detail::Regime::Plus ? Side::Plus : Side::Minus;
      const auto& f = sys.field(side);

      Section sigma;
      sigma.kind = SectionKind::PlaneY;
      sigma.value = 0.0;
      sigma.direction =
          side == Side::Plus ? SectionDirection::Decreasing : SectionDirection::Increasing;
      sigma.terminal = true;
      std::vector<EventSpec<3>> evs{detail::section_event(sigma)};

      auto rhs = [&f](double, const StateN<3>& y, StateN<3>& dy) { dy = f(y); };
      auto res = solve_dopri5<3>(rhs, p, t, t_max, cfg, evs,
                                 opt.blowout_radius * opt.blowout_radius);
      append_samples(res.samples);
      if (!res.segs.empty()) {
        auto segs = std::make_shared<std::vector<DenseSeg<3>>>(std::move(res.segs));
        tr.pieces.push_back({segs->front().t0, res.t_end,
                             [segs](double tt) { return eval_dense<3>(*segs, tt); }});
      }
      t = res.t_end;
      p = res.y_end;

      if (res.status == OdeStatus::BlowoutStop) {
        tr.events.push_back({t, EventKind::Blowout, p, -1});
        tr.status = TrajStatus::BlowoutStop;
        break;
      }
      if (res.status == OdeStatus::ReachedEnd) {
        tr.status = TrajStatus::ReachedEnd;
        break;
      }
      p[1] = 0.0;
      tr.events.push_back({t, EventKind::SigmaEntry, p, -1});
      detail::Regime came_from = reg;
      if (!resolve_on_sigma(true, came_from)) break;
      if (reg != came_from) count_switch();
    } else {
      // sliding arc in desingularized time; state (x, z, t_phys)
      int s = p[2] < 0.0 ? 1 : -1;
      double b = np.b, beta = np.beta, c = np.c, gamma = np.gamma;
      auto rhs = [s, b, beta, c, gamma](double, const StateN<3>& u, StateN<3>& du) {
        du[0] = s * (-c * u[0] + b * u[1]);
        du[1] = s * (-beta * u[0] - gamma * u[1]);
        du[2] = s * (-beta * u[0] - b * u[1]);
      };

      std::vector<EventSpec<3>> evs(4);
      double tq2 = sq(opt.tau_q);
      evs[0].g = [tq2](double, const StateN<3>& u) { return sq(u[0]) + sq(u[1]) - tq2; };
      evs[0].direction = -1;
      evs[0].terminal = true;
      evs[1].g = [](double, const StateN<3>& u) { return u[1]; };  // fold z = 0
      evs[1].direction = s;
      evs[1].terminal = true;
      evs[2].g = [](double, const StateN<3>& u) { return u[0]; };  // fold x = 0
      evs[2].direction = s;
      evs[2].terminal = true;
      evs[3].g = [t_max](double, const StateN<3>& u) { return u[2] - t_max; };
      evs[3].direction = 1;
      evs[3].terminal = true;

      StateN<3> u0{p[0], p[2], t};
      auto res = solve_dopri5<3>(rhs, u0, 0.0, opt.desing_tau_max, cfg, evs);
      if (res.status != OdeStatus::TerminalEvent)
        throw error(errc::max_steps_exceeded, "sliding arc exhausted its time budget");

      for (size_t i = 1; i < res.samples.size(); ++i)
        tr.samples.emplace_back(res.samples[i].second[2],
                                Vec3{res.samples[i].second[0], 0.0, res.samples[i].second[1]});

      double t_arc0 = t;
      double t_arc1 = res.y_end[2];
      double tau_end = res.t_end;
      if (!res.segs.empty() && t_arc1 > t_arc0) {
        auto segs = std::make_shared<std::vector<DenseSeg<3>>>(std::move(res.segs));
        // physical time is a strictly increasing component of the state, so
        // invert it by bisection in desingularized time
        auto eval_phys = [segs, tau_end](double tt) {
          double lo = 0.0, hi = tau_end;
          for (int it = 0; it < 60 && hi - lo > 1e-15 * (1.0 + tau_end); ++it) {
            double mid = 0.5 * (lo + hi);
            if (eval_dense<3>(*segs, mid)[2] < tt) lo = mid;
            else hi = mid;
          }
          StateN<3> u = eval_dense<3>(*segs, 0.5 * (lo + hi));
          return Vec3{u[0], 0.0, u[1]};
        };
        tr.pieces.push_back({t_arc0, t_arc1, eval_phys});
      }
      t = t_arc1;
      int which = res.hits.back().event_index;
      p = {res.y_end[0], 0.0, res.y_end[1]};

      if (which == 0) {
        tr.events.push_back({t, EventKind::TwoFoldHit, p, -1});
        tr.reached_two_fold = true;
        tr.status = TrajStatus::TerminalEvent;
        break;
      }
      if (which == 3) {
        tr.status = TrajStatus::ReachedEnd;
        t = t_max;
        break;
      }
      if (which == 1) p[2] = 0.0;  // snap onto the fold that was hit
      if (which == 2) p[0] = 0.0;
      tr.events.push_back({t, EventKind::SlidingExit, p, -1});
      detail::Regime came_from = reg;
      if (!resolve_on_sigma(false, came_from)) break;
      if (reg != came_from) count_switch();
    }
  }

  if (!done && tr.status == TrajStatus::ReachedEnd) t = std::min(t, t_max);
  tr.t_end = t;
  tr.y_end = p;
  return tr;
}

}  // namespace twofold
