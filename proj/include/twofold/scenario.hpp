#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "twofold/charts.hpp"
#include "twofold/core.hpp"
#include "twofold/hybrid.hpp"
#include "twofold/jsonio.hpp"
#include "twofold/log.hpp"
#include "twofold/normal_form.hpp"
#include "twofold/ode.hpp"
#include "twofold/parallel.hpp"
#include "twofold/params.hpp"
#include "twofold/pws.hpp"
#include "twofold/regularization.hpp"
#include "twofold/section_map.hpp"
#include "twofold/svg.hpp"
#include "twofold/twist.hpp"

namespace twofold {

enum class Scenario {
  VarthetaCheck,
  EigenReport,
  CanardPortrait,
  HybridSim,
  LocalMapSweep,
  Twist,
  LimitCycle,
  CaseDip,
  ChartRoundtrip,
};

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::VarthetaCheck: return "vartheta-check";
    case Scenario::EigenReport: return "eigen-report";
    case Scenario::CanardPortrait: return "canard-portrait";
    case Scenario::HybridSim: return "hybrid-sim";
    case Scenario::LocalMapSweep: return "local-map-sweep";
    case Scenario::Twist: return "twist";
    case Scenario::LimitCycle: return "limit-cycle";
    case Scenario::CaseDip: return "case-dip";
    case Scenario::ChartRoundtrip: return "chart-roundtrip";
  }
  return "?";
}

inline bool scenario_from_name(const std::string& s, Scenario& out) {
  for (Scenario k :
       {Scenario::VarthetaCheck, Scenario::EigenReport, Scenario::CanardPortrait,
        Scenario::HybridSim, Scenario::LocalMapSweep, Scenario::Twist, Scenario::LimitCycle,
        Scenario::CaseDip, Scenario::ChartRoundtrip}) {
    if (s == scenario_name(k)) {
      out = k;
      return true;
    }
  }
  return false;
}

struct ScenarioGrid {
  int n_x = 50;
  int n_y = 5;
  int n_z = 5;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::EigenReport;
  NormalFormParams params;
  bool has_params = false;
  std::string phi_family = "arctan";
  std::vector<double> epsilons;
  SectionGeometry geometry;
  IntegratorConfig solver;
  ScenarioGrid grid;
  std::string output_dir = "twofold-out";
  long seed = 0;

  // scenario-specific knobs
  Vec3 initial{};
  bool has_initial = false;
  double t_max = 10.0;
  std::vector<double> mus;  // twist; {0.1} when empty
  AffineMap2 global_return;
  bool has_global_return = false;
  int n_points = 0;  // 0 selects the scenario default
  double portrait_radius = 1.0;
};

enum class Severity { Warning, Error };

inline const char* severity_name(Severity s) {
  return s == Severity::Error ? "error" : "warning";
}

struct Finding {
  std::string code;
  std::string message;
  Severity severity = Severity::Error;
};

namespace detail {

inline double jnum(const nlohmann::json& j, const char* key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

inline Vec2 jvec2(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2)
    throw error(errc::config_error, "expected a 2-element numeric array");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace detail

// Reads and structurally decodes a config file. Semantic checks (assumption
// reports, geometry, solver sanity) live in validate_config so the validate
// command can present them as findings instead of hard failures.
inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::config_error, "cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw error(errc::config_error, std::string("config parse error: ") + e.what());
  }
  try {
    ScenarioConfig c;
    if (!j.contains("scenario") || !j.at("scenario").is_string())
      throw error(errc::config_error, "missing required string field \"scenario\"");
    std::string sname = j.at("scenario").get<std::string>();
    if (!scenario_from_name(sname, c.scenario))
      throw error(errc::config_error, "unknown scenario: " + sname);
    if (j.contains("params")) {
      const auto& p = j.at("params");
      c.params.b = detail::jnum(p, "b", c.params.b);
      c.params.beta = detail::jnum(p, "beta", c.params.beta);
      c.params.c = detail::jnum(p, "c", c.params.c);
      c.params.gamma = detail::jnum(p, "gamma", c.params.gamma);
      c.has_params = true;
    }
    if (j.contains("phi")) c.phi_family = j.at("phi").value("family", c.phi_family);
    if (j.contains("epsilons"))
      for (const auto& e : j.at("epsilons")) c.epsilons.push_back(e.get<double>());
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      c.geometry.delta = detail::jnum(g, "delta", c.geometry.delta);
      c.geometry.nu = detail::jnum(g, "nu", c.geometry.nu);
      c.geometry.zeta_w = detail::jnum(g, "zeta_w", c.geometry.zeta_w);
      c.geometry.varsigma = detail::jnum(g, "varsigma", c.geometry.varsigma);
      if (g.contains("I_in")) c.geometry.I_in = detail::jvec2(g.at("I_in"));
      if (g.contains("R_out")) {
        const auto& r = g.at("R_out");
        Vec2 rx = detail::jvec2(r.at("x"));
        Vec2 rz = detail::jvec2(r.at("z"));
        c.geometry.R_out = Rect{{rx[0], rz[0]}, {rx[1], rz[1]}};
      }
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      c.solver.rel_tol = detail::jnum(s, "rel_tol", c.solver.rel_tol);
      c.solver.abs_tol = detail::jnum(s, "abs_tol", c.solver.abs_tol);
      c.solver.h_init = detail::jnum(s, "h_init", c.solver.h_init);
      c.solver.h_min = detail::jnum(s, "h_min", c.solver.h_min);
      c.solver.h_max = detail::jnum(s, "h_max", c.solver.h_max);
      if (s.contains("max_steps")) c.solver.max_steps = s.at("max_steps").get<long>();
      c.solver.event_tol = detail::jnum(s, "event_tol", c.solver.event_tol);
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.contains("n_x")) c.grid.n_x = g.at("n_x").get<int>();
      if (g.contains("n_y")) c.grid.n_y = g.at("n_y").get<int>();
      if (g.contains("n_z")) c.grid.n_z = g.at("n_z").get<int>();
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<long>();
    if (j.contains("initial")) {
      const auto& a = j.at("initial");
      if (!a.is_array() || a.size() != 3)
        throw error(errc::config_error, "initial must be a 3-element numeric array");
      c.initial = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
      c.has_initial = true;
    }
    c.t_max = detail::jnum(j, "t_max", c.t_max);
    if (j.contains("mus"))
      for (const auto& m : j.at("mus")) c.mus.push_back(m.get<double>());
    else if (j.contains("mu"))
      c.mus.push_back(j.at("mu").get<double>());
    if (j.contains("global_return")) {
      const auto& g = j.at("global_return");
      const auto& a = g.at("a");
      if (!a.is_array() || a.size() != 2)
        throw error(errc::config_error, "global_return.a must be a 2x2 numeric array");
      c.global_return.a[0] = detail::jvec2(a.at(0));
      c.global_return.a[1] = detail::jvec2(a.at(1));
      c.global_return.b = detail::jvec2(g.at("offset"));
      c.has_global_return = true;
    }
    if (j.contains("n_points")) c.n_points = j.at("n_points").get<int>();
    c.portrait_radius = detail::jnum(j, "portrait_radius", c.portrait_radius);
    return c;
  } catch (const error&) {
    throw;
  } catch (const std::exception& e) {
    throw error(errc::config_error, std::string("config field error: ") + e.what());
  }
}

// Static semantic checks; deliberately integration-free so it stays instant.
inline std::vector<Finding> validate_config(const ScenarioConfig& c) {
  std::vector<Finding> out;
  auto add = [&out](const char* code, std::string msg, Severity sev) {
    out.push_back({code, std::move(msg), sev});
  };

  try {
    make_phi(c.phi_family);
  } catch (const error& e) {
    add(errc_name(e.code()), e.what(), Severity::Error);
  }

  bool needs_eigen = c.scenario == Scenario::CanardPortrait ||
                     c.scenario == Scenario::LocalMapSweep || c.scenario == Scenario::Twist ||
                     c.scenario == Scenario::LimitCycle || c.scenario == Scenario::CaseDip;
  bool needs_geometry = c.scenario == Scenario::LocalMapSweep ||
                        c.scenario == Scenario::LimitCycle || c.scenario == Scenario::CaseDip;
  bool needs_params = c.scenario != Scenario::ChartRoundtrip;

  bool params_ok = false;
  if (needs_params && !c.has_params) {
    add("ConfigError", "scenario requires a \"params\" block", Severity::Error);
  } else if (c.has_params) {
    try {
      c.params.validate();
      params_ok = true;
    } catch (const error& e) {
      add(errc_name(e.code()), e.what(), Severity::Error);
    }
  }

  bool a_holds = false;
  if (params_ok) {
    AssumptionReport a = check_assumption_A(c.params);
    a_holds = a.holds;
    if (!a.holds)
      add("AssumptionAViolated", a.diagnostic,
          needs_eigen ? Severity::Error : Severity::Warning);
    if (a.holds && !check_assumption_B(c.params)) {
      EigenData ed = eigen_data(c.params);
      char buf[96];
      std::snprintf(buf, sizeof buf, "xi = %.17g is within 1e-3 of an integer", ed.xi);
      add("AssumptionViolated", buf, needs_eigen ? Severity::Error : Severity::Warning);
    }
  }

  if (params_ok && a_holds) {
    try {
      validate_geometry(c.params, c.geometry);
    } catch (const error& e) {
      add(errc_name(e.code()), e.what(), needs_geometry ? Severity::Error : Severity::Warning);
    }
  }

  try {
    resolve_config(c.solver, 1e-13);
  } catch (const error& e) {
    add(errc_name(e.code()), e.what(), Severity::Error);
  }

  bool needs_epsilons = c.scenario == Scenario::LocalMapSweep ||
                        c.scenario == Scenario::LimitCycle || c.scenario == Scenario::CaseDip;
  if (needs_epsilons && c.epsilons.empty())
    add("ConfigError", "scenario requires a nonempty \"epsilons\" list", Severity::Error);
  for (double e : c.epsilons)
    if (!(e > 0.0)) {
      add("NonpositiveEpsilon", "all epsilons must be positive", Severity::Error);
      break;
    }
  for (size_t i = 1; i < c.epsilons.size(); ++i)
    if (!(c.epsilons[i] < c.epsilons[i - 1])) {
      add("ConfigError", "epsilons must be strictly decreasing", Severity::Error);
      break;
    }

  switch (c.scenario) {
    case Scenario::HybridSim:
      if (!c.has_initial)
        add("ConfigError", "hybrid-sim requires an \"initial\" point", Severity::Error);
      else if (c.initial[1] == 0.0 && std::hypot(c.initial[0], c.initial[2]) < 1e-8)
        add("ConfigError", "initial point coincides with the two-fold", Severity::Error);
      if (!(c.t_max > 0.0)) add("ConfigError", "t_max must be positive", Severity::Error);
      break;
    case Scenario::Twist:
      for (double m : c.mus)
        if (!(m > 0.0 && m <= 0.2)) {
          add("ConfigError", "every mu must lie in (0, 0.2]", Severity::Error);
          break;
        }
      break;
    case Scenario::LimitCycle:
      if (!c.has_global_return)
        add("ConfigError", "limit-cycle requires a \"global_return\" block", Severity::Error);
      break;
    case Scenario::VarthetaCheck:
      if (c.grid.n_x < 1 || c.grid.n_z < 1)
        add("ConfigError", "grid.n_x and grid.n_z must be at least 1", Severity::Error);
      break;
    case Scenario::LocalMapSweep:
    case Scenario::CaseDip:
      if (c.grid.n_y < 1 || c.grid.n_z < 1)
        add("ConfigError", "grid.n_y and grid.n_z must be at least 1", Severity::Error);
      break;
    case Scenario::CanardPortrait:
      if (!(c.portrait_radius > 0.0))
        add("ConfigError", "portrait_radius must be positive", Severity::Error);
      if (!(c.t_max > 0.0)) add("ConfigError", "t_max must be positive", Severity::Error);
      break;
    case Scenario::ChartRoundtrip:
      if (c.n_points < 0)
        add("ConfigError", "n_points must be nonnegative", Severity::Error);
      break;
    default:
      break;
  }
  return out;
}

inline Json findings_json(const std::vector<Finding>& findings) {
  Json root = Json::object();
  Json arr = Json::array();
  for (const auto& f : findings) {
    Json item = Json::object();
    item["code"] = f.code;
    item["severity"] = severity_name(f.severity);
    item["message"] = f.message;
    arr.push(std::move(item));
  }
  root["findings"] = std::move(arr);
  return root;
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error(errc::config_error, "cannot write output file: " + path);
  out << content;
}

inline const char* traj_status_name(TrajStatus s) {
  switch (s) {
    case TrajStatus::ReachedEnd: return "ReachedEnd";
    case TrajStatus::TerminalEvent: return "TerminalEvent";
    case TrajStatus::BlowoutStop: return "BlowoutStop";
  }
  return "?";
}

inline std::string csv_num(double v) { return fmt_g17(v); }

inline std::string trajectory_csv(const Trajectory& tr) {
  struct Row {
    double t;
    Vec3 p;
    const char* event;
  };
  std::vector<Row> rows;
  rows.reserve(tr.samples.size() + tr.events.size());
  for (const auto& s : tr.samples) rows.push_back({s.first, s.second, ""});
  for (const auto& e : tr.events) rows.push_back({e.t, e.state, event_kind_name(e.kind)});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  std::string out = "t,x,y,z,event\n";
  for (const auto& r : rows) {
    out += csv_num(r.t);
    for (int i = 0; i < 3; ++i) {
      out += ',';
      out += csv_num(r.p[i]);
    }
    out += ',';
    out += r.event;
    out += '\n';
  }
  return out;
}

inline void write_traj_plots(const std::string& dir, const std::string& stem,
                             const Trajectory& tr) {
  SvgSeries xz, ty;
  for (const auto& s : tr.samples) {
    xz.points.push_back({s.second[0], s.second[2]});
    ty.points.push_back({s.first, s.second[1]});
  }
  ty.color = "#b2561f";
  write_file(dir + "/" + stem + "_xz.svg", render_svg_plot({xz}, stem + " (x,z)", "x", "z"));
  write_file(dir + "/" + stem + "_ty.svg", render_svg_plot({ty}, stem + " (t,y)", "t", "y"));
}

inline Json vec_json(const double* v, int n) {
  Json a = Json::array();
  for (int i = 0; i < n; ++i) a.push(Json(v[i]));
  return a;
}

inline Json eigen_json(const EigenData& e) {
  Json j = Json::object();
  j["lambda_plus"] = e.lambda_plus;
  j["lambda_minus"] = e.lambda_minus;
  j["chi_plus"] = e.chi_plus;
  j["chi_minus"] = e.chi_minus;
  j["v_plus"] = vec_json(e.v_plus.data(), 2);
  j["v_minus"] = vec_json(e.v_minus.data(), 2);
  j["xi"] = e.xi;
  j["n"] = e.n;
  j["z1_star"] = e.z1_star;
  j["discriminant"] = e.discriminant;
  return j;
}

// --- scenario bodies -------------------------------------------------------

inline void run_vartheta_check(const ScenarioConfig& c, int jobs, Json& results) {
  const NormalFormParams np = c.params;
  const int nx = c.grid.n_x, nz = c.grid.n_z;
  std::vector<double> xs(nx), zs = linspace(-3.0, 3.0, nz);
  for (int i = 0; i < nx; ++i) xs[i] = 2.0 * (i + 1) / nx;
  const size_t n = size_t(nx) * nz;
  std::vector<Vec2> hit(n);
  std::vector<double> err(n);
  Section ret{SectionKind::PlaneY, 0.0, SectionDirection::Increasing, true, std::nullopt};
  auto fm = [np](const Vec3& p) { return field(np, Side::Minus, p); };
  parallel_for(n, jobs, [&](size_t k) {
    double x = xs[k / nz], z = zs[k % nz];
    Trajectory tr = integrate(fm, {x, 0.0, z}, 0.0, 2.0 * x + 1.0, c.solver, {ret});
    if (tr.status != TrajStatus::TerminalEvent)
      throw error(errc::max_steps_exceeded, "orbit failed to return to the switching plane");
    Vec2 th = return_map_vartheta(np, {x, z});
    hit[k] = {tr.y_end[0], tr.y_end[2]};
    err[k] = std::max({std::abs(tr.y_end[0] - th[0]), std::abs(tr.y_end[1]),
                       std::abs(tr.y_end[2] - th[1])});
  });
  double worst = 0.0;
  std::string csv = "x,z,x_return,z_return,abs_error\n";
  for (size_t k = 0; k < n; ++k) {
    worst = std::max(worst, err[k]);
    csv += csv_num(xs[k / nz]) + "," + csv_num(zs[k % nz]) + "," + csv_num(hit[k][0]) + "," +
           csv_num(hit[k][1]) + "," + csv_num(err[k]) + "\n";
  }
  write_file(c.output_dir + "/vartheta_check.csv", csv);
  results["n_x"] = nx;
  results["n_z"] = nz;
  results["max_abs_error"] = worst;
}

inline void run_eigen_report(const ScenarioConfig& c, Json& results) {
  EigenData e = eigen_data(c.params);
  CanardLines cl = canard_lines(c.params);
  Vec3 u = u_out(c.params, c.geometry.nu);
  results["canard_strong_slope"] = cl.strong_slope;
  results["canard_weak_slope"] = cl.weak_slope;
  results["z1_star_positive"] = e.z1_star > 0.0;
  results["u_out"] = vec_json(u.data(), 3);
  results["resonance_margin_ok"] = check_assumption_B(c.params);
}

inline void run_canard_portrait(const ScenarioConfig& c, int jobs, Json& results) {
  const NormalFormParams np = c.params;
  const double r = c.portrait_radius;
  const int per_edge = c.n_points > 0 ? c.n_points : 6;
  std::vector<Vec2> starts;
  for (double z : linspace(-0.98 * r, -0.02 * r, per_edge)) starts.push_back({-r, z});
  for (double x : linspace(-0.98 * r, -0.02 * r, per_edge)) starts.push_back({x, -r});

  auto rhs = [np](double, const StateN<2>& p, StateN<2>& d) {
    Vec2 f = desingularized_sliding_field(np, p[0], p[1]);
    d = {f[0], f[1]};
  };
  const double ball2 = sq(1e-3 * r);
  std::vector<EventSpec<2>> evs(3);
  evs[0] = {[ball2](double, const StateN<2>& p) { return p[0] * p[0] + p[1] * p[1] - ball2; },
            -1, true, nullptr};
  evs[1] = {[](double, const StateN<2>& p) { return p[0]; }, +1, true, nullptr};
  evs[2] = {[](double, const StateN<2>& p) { return p[1]; }, +1, true, nullptr};

  std::vector<OdeResult<2>> runs(starts.size());
  parallel_for(starts.size(), jobs, [&](size_t k) {
    runs[k] = solve_dopri5<2>(rhs, {starts[k][0], starts[k][1]}, 0.0, c.t_max, c.solver, evs,
                              sq(4.0 * r), false);
  });

  int reached = 0;
  std::vector<SvgSeries> series;
  for (size_t k = 0; k < runs.size(); ++k) {
    const auto& res = runs[k];
    bool hit_ball = res.status == OdeStatus::TerminalEvent && !res.hits.empty() &&
                    res.hits.back().event_index == 0;
    if (hit_ball) ++reached;
    std::string csv = "t,x,y,z,event\n";
    SvgSeries s;
    for (const auto& smp : res.samples) {
      csv += csv_num(smp.first) + "," + csv_num(smp.second[0]) + ",0," +
             csv_num(smp.second[1]) + ",\n";
      s.points.push_back({smp.second[0], smp.second[1]});
    }
    char name[64];
    std::snprintf(name, sizeof name, "portrait_%02zu.csv", k);
    write_file(c.output_dir + "/" + name, csv);
    series.push_back(std::move(s));
  }
  CanardLines cl = canard_lines(np);
  SvgSeries strong{{{-r, -r * cl.strong_slope}, {0.0, 0.0}}, "#c22", 1.8};
  SvgSeries weak{{{-r, -r * cl.weak_slope}, {0.0, 0.0}}, "#2a2", 1.8};
  series.push_back(strong);
  series.push_back(weak);
  write_file(c.output_dir + "/portrait_xz.svg",
             render_svg_plot(series, "desingularized sliding flow", "x", "z"));
  results["n_trajectories"] = starts.size();
  results["reached_two_fold"] = reached;
}

inline void run_hybrid_sim(const ScenarioConfig& c, Json& results) {
  PwsSystem sys = make_pws_system(c.params);
  Trajectory tr = integrate_hybrid_filippov(sys, c.params, c.initial, c.t_max, c.solver);
  write_file(c.output_dir + "/hybrid_sim.csv", trajectory_csv(tr));
  write_traj_plots(c.output_dir, "hybrid_sim", tr);
  results["status"] = traj_status_name(tr.status);
  results["reached_two_fold"] = tr.reached_two_fold;
  results["t_end"] = tr.t_end;
  results["final_state"] = vec_json(tr.y_end.data(), 3);
  Json evs = Json::array();
  for (const auto& e : tr.events) {
    Json item = Json::object();
    item["t"] = e.t;
    item["kind"] = event_kind_name(e.kind);
    item["state"] = vec_json(e.state.data(), 3);
    evs.push(std::move(item));
  }
  results["events"] = std::move(evs);
}

inline void run_local_map_sweep(const ScenarioConfig& c, int jobs, Json& results) {
  RegularizationFn phi = make_phi(c.phi_family);
  Vec3 u = u_out(c.params, c.geometry.nu);
  Vec2 u_proj{u[0], u[2]};
  std::string csv = "epsilon,y_in,z_in,x_out,z_out,dist_to_u_out,jac_op_norm,note\n";
  Json sweep = Json::array();
  SvgSeries dist_s, diam_s;
  diam_s.color = "#b2561f";
  for (double eps : c.epsilons) {
    SectionMapResult r = local_map_L(c.params, phi, eps, c.geometry,
                                     GridSpec{c.grid.n_y, c.grid.n_z}, c.solver, jobs, true);
    std::vector<std::string> note(r.grid.size());
    for (const auto& f : r.failures) note[f.index] = errc_name(f.code);
    for (size_t i = 0; i < r.grid.size(); ++i) {
      csv += csv_num(eps) + "," + csv_num(r.grid[i][0]) + "," + csv_num(r.grid[i][1]) + ",";
      if (r.images[i]) {
        const Vec2& im = *r.images[i];
        csv += csv_num(im[0]) + "," + csv_num(im[1]) + "," + csv_num(norm(im - u_proj)) + ",";
      } else {
        csv += ",,,";
      }
      csv += (r.jacobians[i] ? csv_num(op_norm(*r.jacobians[i])) : "") + "," + note[i] + "\n";
    }
    Json item = Json::object();
    item["epsilon"] = eps;
    item["diam_image"] = r.diam_image;
    item["max_dist_to_u_out"] = r.max_dist_to_u_out;
    item["max_op_norm_jac"] = r.max_op_norm_jac;
    item["n_failures"] = r.failures.size();
    sweep.push(std::move(item));
    dist_s.points.push_back({std::log10(eps), r.max_dist_to_u_out});
    diam_s.points.push_back({std::log10(eps), r.diam_image});
  }
  write_file(c.output_dir + "/local_map_sweep.csv", csv);
  write_file(c.output_dir + "/sweep_metrics.svg",
             render_svg_plot({dist_s, diam_s}, "image distance and diameter vs epsilon",
                             "log10(epsilon)", "value"));
  results["sweep"] = std::move(sweep);
}

inline void run_twist(const ScenarioConfig& c, Json& results) {
  RegularizationFn phi = make_phi(c.phi_family);
  std::vector<double> mus = c.mus.empty() ? std::vector<double>{0.1} : c.mus;
  Json runs = Json::array();
  std::string csv = "mu,zeta_sign,third_component,weber_residual\n";
  for (double mu : mus) {
    TwistResult t = variational_twist(c.params, phi, mu, c.solver);
    Json item = Json::object();
    item["mu"] = t.mu;
    item["xi"] = t.xi;
    item["n"] = t.n;
    item["zeta_sign"] = t.zeta_sign;
    item["varpi_out_normalized"] = vec_json(t.varpi_out_normalized.data(), 3);
    item["weber_residual"] = t.weber_residual;
    runs.push(std::move(item));
    csv += csv_num(t.mu) + "," + std::to_string(t.zeta_sign) + "," +
           csv_num(t.varpi_out_normalized[2]) + "," + csv_num(t.weber_residual) + "\n";
  }
  write_file(c.output_dir + "/twist.csv", csv);
  results["runs"] = std::move(runs);
}

inline void run_limit_cycle(const ScenarioConfig& c, Json& results, Json& errors, bool& failed) {
  RegularizationFn phi = make_phi(c.phi_family);
  Vec3 u = u_out(c.params, c.geometry.nu);
  Vec2 u_proj{u[0], u[2]};
  Json runs = Json::array();
  for (double eps : c.epsilons) {
    try {
      LimitCycleResult r = find_limit_cycle(c.params, phi, eps, c.geometry, c.global_return,
                                            c.solver);
      Json item = Json::object();
      item["epsilon"] = eps;
      item["fixed_point"] = vec_json(r.fixed_point.data(), 2);
      item["floquet_moduli"] = vec_json(r.floquet_moduli.data(), 2);
      item["newton_iters"] = r.newton_iters;
      item["used_picard_fallback"] = r.used_picard_fallback;
      item["dist_to_u_out"] = norm(r.fixed_point - u_proj);
      runs.push(std::move(item));
      if (eps == c.epsilons.back()) {
        write_file(c.output_dir + "/limit_cycle.csv", trajectory_csv(r.cycle));
        write_traj_plots(c.output_dir, "limit_cycle", r.cycle);
      }
    } catch (const error& e) {
      Json err = Json::object();
      err["code"] = errc_name(e.code());
      char buf[160];
      std::snprintf(buf, sizeof buf, "epsilon = %.17g: %s", eps, e.what());
      err["message"] = std::string(buf);
      errors.push(std::move(err));
      failed = true;
    }
  }
  results["runs"] = std::move(runs);
}

inline void run_case_dip(const ScenarioConfig& c, int jobs, Json& results) {
  RegularizationFn phi = make_phi(c.phi_family);
  Json runs = Json::array();
  std::string csv = "epsilon,dip_depth\n";
  SvgSeries s;
  for (double eps : c.epsilons) {
    double dip = case_b_dip_depth(c.params, phi, eps, c.geometry, c.solver,
                                  GridSpec{c.grid.n_y, c.grid.n_z}, jobs);
    Json item = Json::object();
    item["epsilon"] = eps;
    item["dip_depth"] = dip;
    runs.push(std::move(item));
    csv += csv_num(eps) + "," + csv_num(dip) + "\n";
    s.points.push_back({std::log10(eps), dip});
  }
  write_file(c.output_dir + "/case_dip.csv", csv);
  write_file(c.output_dir + "/case_dip.svg",
             render_svg_plot({s}, "minimum y along the passage vs epsilon", "log10(epsilon)",
                             "dip depth"));
  results["runs"] = std::move(runs);
}

inline void run_chart_roundtrip(const ScenarioConfig& c, Json& results) {
  const int n = c.n_points > 0 ? c.n_points : 1000;
  std::mt19937_64 rng(static_cast<unsigned long long>(c.seed));
  auto u01 = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };
  const Chart all[] = {Chart::Ebar1, Chart::Ybar1, Chart::YbarM1,
                       Chart::K1,    Chart::K2,    Chart::K3};
  double worst = 0.0;
  long comparisons = 0;
  for (int k = 0; k < n; ++k) {
    double sx = u01() < 0.5 ? -1.0 : 1.0;
    double sy = u01() < 0.5 ? -1.0 : 1.0;
    Cartesian4 pt{sx * (0.1 + 1.9 * u01()), sy * (0.1 + 1.9 * u01()), -2.0 + 4.0 * u01(),
                  1e-3 + 0.5 * u01()};
    double scale = 1.0 + std::max({std::abs(pt[0]), std::abs(pt[1]), std::abs(pt[2]), pt[3]});
    std::vector<ChartPoint> reps;
    for (Chart ch : all) {
      try {
        reps.push_back(from_cartesian(pt, ch));
      } catch (const error&) {
      }
    }
    for (const auto& rp : reps)
      for (const auto& rq : reps) {
        Cartesian4 back = to_cartesian(chart_transform(rp, rq.chart));
        for (int i = 0; i < 4; ++i)
          worst = std::max(worst, std::abs(back[i] - pt[i]) / scale);
        ++comparisons;
      }
  }
  results["n_points"] = n;
  results["n_comparisons"] = comparisons;
  results["max_roundtrip_error"] = worst;
}

}  // namespace detail

// Executes a validated config. Returns 0 on success and 3 when any numerical
// stage failed; summary.json is written either way so partial output survives.
inline int run_scenario(const ScenarioConfig& c, int jobs) {
  namespace fs = std::filesystem;
  fs::create_directories(c.output_dir);

  Json root = Json::object();
  root["scenario"] = scenario_name(c.scenario);
  if (c.has_params) {
    Json p = Json::object();
    p["b"] = c.params.b;
    p["beta"] = c.params.beta;
    p["c"] = c.params.c;
    p["gamma"] = c.params.gamma;
    root["params"] = std::move(p);
  } else {
    root["params"] = Json();
  }
  Json ph = Json::object();
  ph["family"] = c.phi_family;
  root["phi"] = std::move(ph);
  root["seed"] = c.seed;

  bool a_holds = false;
  if (c.has_params) {
    AssumptionReport a = check_assumption_A(c.params);
    a_holds = a.holds;
    Json ja = Json::object();
    ja["holds"] = a.holds;
    ja["diagnostic"] = a.diagnostic;
    Json jb = Json::object();
    jb["holds"] = a.holds ? check_assumption_B(c.params) : false;
    Json as = Json::object();
    as["A"] = std::move(ja);
    as["B"] = std::move(jb);
    root["assumptions"] = std::move(as);
    root["eigen"] = a.holds ? detail::eigen_json(eigen_data(c.params)) : Json();
    if (a_holds) {
      try {
        root["case"] = case_kind_name(classify_case(c.params, c.geometry.I_in, c.geometry.delta));
      } catch (const error&) {
        root["case"] = Json();
      }
    } else {
      root["case"] = Json();
    }
  } else {
    root["assumptions"] = Json();
    root["eigen"] = Json();
    root["case"] = Json();
  }

  Json results = Json::object();
  Json errors = Json::array();
  bool failed = false;
  try {
    switch (c.scenario) {
      case Scenario::VarthetaCheck: detail::run_vartheta_check(c, jobs, results); break;
      case Scenario::EigenReport: detail::run_eigen_report(c, results); break;
      case Scenario::CanardPortrait: detail::run_canard_portrait(c, jobs, results); break;
      case Scenario::HybridSim: detail::run_hybrid_sim(c, results); break;
      case Scenario::LocalMapSweep: detail::run_local_map_sweep(c, jobs, results); break;
      case Scenario::Twist: detail::run_twist(c, results); break;
      case Scenario::LimitCycle: detail::run_limit_cycle(c, results, errors, failed); break;
      case Scenario::CaseDip: detail::run_case_dip(c, jobs, results); break;
      case Scenario::ChartRoundtrip: detail::run_chart_roundtrip(c, results); break;
    }
  } catch (const error& e) {
    Json err = Json::object();
    err["code"] = errc_name(e.code());
    err["message"] = std::string(e.what());
    errors.push(std::move(err));
    failed = true;
  } catch (const std::exception& e) {
    Json err = Json::object();
    err["code"] = "InternalError";
    err["message"] = std::string(e.what());
    errors.push(std::move(err));
    failed = true;
  }
  root["results"] = std::move(results);
  root["errors"] = std::move(errors);
  detail::write_file(c.output_dir + "/summary.json", root.dump() + "\n");
  if (failed) log_error("scenario finished with errors; see summary.json");
  return failed ? 3 : 0;
}

}  // namespace twofold
