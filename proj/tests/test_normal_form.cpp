#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "twofold/normal_form.hpp"
#include "twofold/ode.hpp"

using namespace twofold;

namespace {

constexpr double kSqrt5 = 2.23606797749979;

// Planar matrix whose eigenstructure the slopes chi describe.
Mat2 sliding_matrix(const NormalFormParams& np) {
  return {{Vec2{-np.c, np.b}, Vec2{-np.beta, -np.gamma}}};
}

double eigvec_residual(const NormalFormParams& np, double lambda, double chi) {
  Mat2 m = sliding_matrix(np);
  Vec2 v{1.0, -chi};
  Vec2 mv = mat_apply(m, v);
  return norm(mv - lambda * v);
}

double charpoly_residual(const NormalFormParams& np, double lambda) {
  return std::abs(lambda * lambda + (np.c + np.gamma) * lambda +
                  (np.c * np.gamma + np.b * np.beta));
}

// Draws with the discriminant and both trace conditions positive by
// construction.
NormalFormParams draw_valid(std::mt19937_64& rng) {
  auto u = [&](double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
  };
  double b = std::exp(u(-1.0, 1.0));
  double beta = std::exp(u(-1.0, 1.0));
  double g = 2.0 * std::sqrt(b * beta) * (1.0 + u(0.5, 2.0));
  double s = std::sqrt(g * g - 4.0 * b * beta);
  double w = u(0.1, 3.0);
  return {b, beta, (g + s + w) / 2.0, (s + w - g) / 2.0};
}

}  // namespace

TEST_CASE("side fields and their constant Jacobians") {
  NormalFormParams np = tt::params_a();
  Vec3 fp = field(np, Side::Plus, {0.5, 0.2, -2.0});
  CHECK(fp[0] == 4.0);
  CHECK(fp[1] == -2.0);
  CHECK(fp[2] == 1.0);
  Vec3 fm = field(np, Side::Minus, {0.5, -0.2, -2.0});
  CHECK(fm[0] == -1.0);
  CHECK(fm[1] == -0.5);
  CHECK(fm[2] == 1.0);

  for (Side s : {Side::Plus, Side::Minus}) {
    Mat3 j = jacobian(np, s);
    Mat3 fd = fd_jacobian3(
        [&](const Vec3& p) { return field(np, s, p); }, {0.3, 0.1, -1.2});
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) REQUIRE(tt::close(j[r][c], fd[r][c], 1e-7));
  }
}

TEST_CASE("assumption (A) holds or fails with a specific diagnostic") {
  CHECK(check_assumption_A(tt::params_a()).holds);
  CHECK(check_assumption_A(tt::params_stiff()).holds);

  AssumptionReport flat = check_assumption_A({1.0, 1.0, 4.0, 2.0});
  CHECK_FALSE(flat.holds);
  CHECK(flat.diagnostic.find("discriminant = 0") != std::string::npos);

  AssumptionReport trace = check_assumption_A({0.25, 0.25, 1.5, -1.5});
  CHECK_FALSE(trace.holds);
  CHECK(trace.diagnostic.find("c+gamma") != std::string::npos);

  AssumptionReport order = check_assumption_A({1.0, 1.0, 0.0, 3.0});
  CHECK_FALSE(order.holds);
  CHECK(order.diagnostic.find("c-gamma") != std::string::npos);
}

TEST_CASE("eigen data reproduces the closed forms") {
  EigenData e = eigen_data(tt::params_a());
  CHECK(tt::close(e.discriminant, 5.0, 1e-12));
  CHECK(tt::close(e.lambda_plus, (-5.0 + kSqrt5) / 2.0, 1e-12));
  CHECK(tt::close(e.lambda_minus, (-5.0 - kSqrt5) / 2.0, 1e-12));
  CHECK(tt::close(e.chi_plus, -(3.0 + kSqrt5) / 2.0, 1e-12));
  CHECK(tt::close(e.chi_minus, -(3.0 - kSqrt5) / 2.0, 1e-12));
  CHECK(tt::close(e.xi, (3.0 + kSqrt5) / 2.0, 1e-12));
  CHECK(e.n == 2);
  CHECK(tt::close(e.z1_star, (3.0 + kSqrt5) / 2.0 + 2.0, 1e-12));
  CHECK(e.v_plus[0] == 1.0);
  CHECK(tt::close(e.v_plus[1], -e.chi_plus, 1e-15));

  EigenData e2 = eigen_data(tt::params_b());
  CHECK(e2.n == 1);
  CHECK(tt::close(e2.xi, 1.9387489019317513, 1e-12));
  CHECK(tt::close(e2.z1_star, 6.618033988749895, 1e-9));

  EigenData e3 = eigen_data(tt::params_stiff());
  CHECK(e3.n == 17);
  CHECK(tt::close(e3.chi_plus, -0.9947213595499958, 1e-9));
  CHECK(tt::close(e3.z1_star, -0.8052786404500042, 1e-9));
  CHECK(e3.z1_star < 0.0);

  for (const NormalFormParams& np : {tt::params_a(), tt::params_b(), tt::params_stiff()}) {
    EigenData ed = eigen_data(np);
    REQUIRE(charpoly_residual(np, ed.lambda_plus) <= 1e-10);
    REQUIRE(charpoly_residual(np, ed.lambda_minus) <= 1e-10);
    REQUIRE(eigvec_residual(np, ed.lambda_plus, ed.chi_plus) <= 1e-10);
    REQUIRE(eigvec_residual(np, ed.lambda_minus, ed.chi_minus) <= 1e-10);
  }

  CHECK(tt::thrown_code([] { eigen_data({1.0, 1.0, 4.0, 2.0}); }) == errc::assumption_a_violated);
}

TEST_CASE("eigen orderings hold across random valid parameter draws") {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 1000; ++k) {
    NormalFormParams np = draw_valid(rng);
    REQUIRE(check_assumption_A(np).holds);
    EigenData e = eigen_data(np);
    REQUIRE(e.lambda_minus < e.lambda_plus);
    REQUIRE(e.lambda_plus < 0.0);
    REQUIRE(e.chi_plus < e.chi_minus);
    REQUIRE(e.chi_minus < 0.0);
    REQUIRE(e.z1_star > e.chi_minus);
    REQUIRE(e.xi > 1.0);
    REQUIRE(e.n == static_cast<int>(std::floor(e.xi)));
    double scale = 1.0 + sq(e.lambda_minus);
    REQUIRE(charpoly_residual(np, e.lambda_plus) <= 1e-10 * scale);
    REQUIRE(charpoly_residual(np, e.lambda_minus) <= 1e-10 * scale);
    REQUIRE(eigvec_residual(np, e.lambda_plus, e.chi_plus) <= 1e-10 * scale);
    REQUIRE(eigvec_residual(np, e.lambda_minus, e.chi_minus) <= 1e-10 * scale);
  }
}

TEST_CASE("resonance guard rejects integer eigenvalue ratios") {
  CHECK(check_assumption_B(tt::params_a()));
  CHECK(check_assumption_B(tt::params_b()));
  CHECK(check_assumption_B(tt::params_stiff()));

  NormalFormParams res{1.0, 1.0, (3.0 + kSqrt5) / 2.0, (3.0 - kSqrt5) / 2.0};
  REQUIRE(check_assumption_A(res).holds);
  CHECK(tt::close(eigen_data(res).xi, 2.0, 1e-12));
  CHECK_FALSE(check_assumption_B(res));
}

TEST_CASE("exact flows solve both linear sides") {
  NormalFormParams np = tt::params_a();

  Vec3 up = flow_exact(np, Side::Plus, {0.0, 0.0, 0.0}, 1.0);
  CHECK(tt::close(up[0], 4.0, 1e-14));
  CHECK(tt::close(up[1], 0.5, 1e-14));
  CHECK(tt::close(up[2], 1.0, 1e-14));

  Vec3 p0{0.7, -0.4, 1.3};
  Vec3 same = flow_exact(np, Side::Minus, p0, 0.0);
  CHECK(tt::dist3(same, p0) == 0.0);

  for (Side s : {Side::Plus, Side::Minus}) {
    Vec3 start{0.1, s == Side::Plus ? 0.2 : -0.2, 0.3};
    auto f = [&](const Vec3& p) { return field(np, s, p); };
    Trajectory tr = integrate(f, start, 0.0, 10.0, {}, {});
    Vec3 ex = flow_exact(np, s, start, 10.0);
    REQUIRE(tt::dist3(tr.y_end, ex) <= 1e-9 * (1.0 + norm(ex)));
  }
}

TEST_CASE("lower-field return map is the affine reflection") {
  NormalFormParams np = tt::params_a();
  Vec2 th = return_map_vartheta(np, {1.0, -3.0});
  CHECK(tt::close(th[0], -1.0, 1e-14));
  CHECK(tt::close(th[1], -1.0, 1e-14));

  Vec2 fixed = return_map_vartheta(np, {0.0, 1.7});
  CHECK(fixed[0] == 0.0);
  CHECK(fixed[1] == 1.7);

  // the differential maps the weak direction to (-1, z1_star)
  EigenData e = eigen_data(np);
  Vec2 v = e.v_plus;
  double h = 0.5;
  Vec2 a = return_map_vartheta(np, {1.0 + h * v[0], h * v[1]});
  Vec2 b = return_map_vartheta(np, {1.0, 0.0});
  Vec2 dv = (1.0 / h) * (a - b);
  CHECK(tt::close(dv[0], -1.0, 1e-12));
  CHECK(tt::close(dv[1], e.z1_star, 1e-12));

  CHECK(tt::thrown_code([&] { return_map_vartheta(np, {-0.5, 0.0}); }) == errc::negative_x);
}

TEST_CASE("distinguished upper-field segment and its exit point") {
  NormalFormParams np = tt::params_a();

  Vec3 u1 = segment_U(np, 1.0);
  CHECK(tt::close(u1[0], 1.0, 1e-15));
  CHECK(tt::close(u1[1], 1.0 / 32.0, 1e-15));
  CHECK(tt::close(u1[2], 0.25, 1e-15));
  Vec3 u0 = segment_U(np, 0.0);
  CHECK(norm(u0) == 0.0);

  Vec3 out = u_out(np, 0.1);
  CHECK(tt::close(out[0], 1.7888543819998317, 1e-12));
  CHECK(out[1] == 0.1);
  CHECK(tt::close(out[2], 0.4472135954999579, 1e-12));

  // the curve is an orbit: X+ along it is (c/beta) times its r-derivative
  for (double r : {0.2, 0.7, 1.3, 2.4}) {
    Vec3 f = field(np, Side::Plus, segment_U(np, r));
    double hr = 1e-5;
    Vec3 a = segment_U(np, r + hr);
    Vec3 b = segment_U(np, r - hr);
    for (int i = 0; i < 3; ++i) {
      double du = (a[i] - b[i]) / (2.0 * hr);
      REQUIRE(tt::close(f[i], (np.c / np.beta) * du, 1e-8));
    }
  }

  // and the flow from the origin lands on it at y = nu
  Section exit{SectionKind::PlaneY, 0.1, SectionDirection::Increasing, true, std::nullopt};
  auto f = [&](const Vec3& p) { return field(np, Side::Plus, p); };
  Trajectory tr = integrate(f, {0.0, 0.0, 0.0}, 0.0, 10.0, {}, {exit});
  REQUIRE(tr.status == TrajStatus::TerminalEvent);
  CHECK(tt::dist3(tr.y_end, out) <= 1e-8);
}

TEST_CASE("canard lines bound the funnel") {
  NormalFormParams np = tt::params_a();
  CanardLines cl = canard_lines(np);
  CHECK(tt::close(cl.strong_slope, (3.0 - kSqrt5) / 2.0, 1e-12));
  CHECK(tt::close(cl.weak_slope, (3.0 + kSqrt5) / 2.0, 1e-12));

  CHECK(in_funnel(np, -1.0, -2.618033988749895));
  CHECK(in_funnel(np, -1.0, -0.5));
  CHECK_FALSE(in_funnel(np, -1.0, -0.1));
  CHECK_FALSE(in_funnel(np, 0.0, -1.0));
  CHECK_FALSE(in_funnel(np, 1.0, -1.0));
}

TEST_CASE("entry intervals classify by parity and canard position") {
  NormalFormParams np_even = tt::params_a();
  NormalFormParams np_odd = tt::params_b();

  CHECK(classify_case(np_even, {-2.0, -1.0}, 1.0) == CaseKind::CaseA);
  CHECK(classify_case(np_even, {-4.0, -3.0}, 1.0) == CaseKind::CaseB);
  CHECK(classify_case(np_odd, {-2.0, -1.0}, 1.0) == CaseKind::CaseB);
  CHECK(classify_case(np_odd, {-4.0, -3.0}, 1.0) == CaseKind::CaseA);

  CHECK(tt::thrown_code([&] { classify_case(np_even, {-3.0, -2.0}, 1.0); }) ==
        errc::straddles_weak_canard);
  CHECK(tt::thrown_code([&] { classify_case(np_even, {-0.3, -0.2}, 1.0); }) ==
        errc::outside_funnel);
  CHECK(tt::thrown_code([&] { classify_case(np_even, {-1.0, -2.0}, 1.0); }) == errc::config_error);

  CHECK(std::string(case_kind_name(CaseKind::CaseA)) == "a");
  CHECK(std::string(case_kind_name(CaseKind::CaseB)) == "b");
}

TEST_CASE("funnel orbits of the desingularized field leave along the weak direction") {
  NormalFormParams np = tt::params_a();
  EigenData e = eigen_data(np);

  for (Vec2 start : {Vec2{-1.0, -0.5}, Vec2{-0.5, -2.0}, Vec2{-0.3, -0.2}}) {
    REQUIRE(in_funnel(np, start[0], start[1]));
    auto rhs = [&](double, const StateN<2>& w, StateN<2>& dw) {
      Vec2 d = desingularized_sliding_field(np, w[0], w[1]);
      dw[0] = d[0];
      dw[1] = d[1];
    };
    EventSpec<2> ball;
    ball.g = [](double, const StateN<2>& w) { return sq(w[0]) + sq(w[1]) - 1e-12; };
    ball.direction = -1;
    ball.terminal = true;
    IntegratorConfig cfg;
    auto res = solve_dopri5<2>(rhs, {start[0], start[1]}, 0.0, 1e4, cfg, {ball});
    REQUIRE(res.status == OdeStatus::TerminalEvent);
    Vec2 dir{res.y_end[0], res.y_end[1]};
    REQUIRE(line_angle(dir, e.v_plus) < 1e-3);
  }
}
