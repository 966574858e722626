#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "twofold/normal_form.hpp"
#include "twofold/regularization.hpp"

using namespace twofold;

namespace {
constexpr double kTwoOverPi = 2.0 / 3.141592653589793238462643383279502884;
}

TEST_CASE("switching profiles are odd, bounded, and monotone") {
  RegularizationFn at = make_phi("arctan");
  RegularizationFn st = make_phi("st-cubic");

  CHECK(at.eval(0.0) == 0.0);
  CHECK(tt::close(at.eval(1.0), 0.5, 1e-15));
  CHECK(st.eval(0.0) == 0.0);
  CHECK(st.eval(1.0) == 1.0);
  CHECK(st.eval(2.0) == 1.0);
  CHECK(st.eval(-3.0) == -1.0);
  CHECK(tt::close(st.eval(0.5), 0.6875, 1e-15));

  for (int i = 0; i < 10000; ++i) {
    double s = -100.0 + 200.0 * i / 9999.0;
    REQUIRE(at.eval(s) == -at.eval(-s));
    REQUIRE(std::abs(at.eval(s)) < 1.0);
    REQUIRE(at.deriv(s) > 0.0);
    REQUIRE(st.eval(s) == -st.eval(-s));
    REQUIRE(std::abs(st.eval(s)) <= 1.0);
  }
  for (int i = 0; i < 10000; ++i) {
    double s = -0.9999 + 2.0 * 0.9999 * i / 9999.0;
    REQUIRE(st.deriv(s) > 0.0);
  }

  CHECK(tt::thrown_code([] { make_phi("tanh"); }) == errc::config_error);
  CHECK(std::string(phi_family_name(at.family)) == "arctan");
  CHECK(std::string(phi_family_name(st.family)) == "st-cubic");
}

TEST_CASE("profile derivatives match finite differences") {
  RegularizationFn at = make_phi("arctan");
  RegularizationFn st = make_phi("st-cubic");
  double h = 1e-6;
  for (double s : {-20.0, -2.5, -0.4, 0.0, 0.3, 1.7, 40.0}) {
    double fd = (at.eval(s + h) - at.eval(s - h)) / (2.0 * h);
    REQUIRE(tt::close(at.deriv(s), fd, 1e-6));
  }
  for (double s : {-0.9, -0.4, 0.0, 0.3, 0.7}) {
    double fd = (st.eval(s + h) - st.eval(s - h)) / (2.0 * h);
    REQUIRE(tt::close(st.deriv(s), fd, 1e-6));
  }
}

TEST_CASE("profile inverses round-trip on the open range") {
  RegularizationFn at = make_phi("arctan");
  RegularizationFn st = make_phi("st-cubic");
  for (int i = 0; i <= 100; ++i) {
    double s = -50.0 + i;
    REQUIRE(tt::close(at.inverse(at.eval(s)), s, 1e-9 * (1.0 + std::abs(s))));
  }
  for (int i = 1; i < 100; ++i) {
    double s = -1.0 + 2.0 * i / 100.0;
    REQUIRE(tt::close(st.inverse(st.eval(s)), s, 1e-12));
  }
}

TEST_CASE("arctan tail expansion is exact on both branches") {
  RegularizationFn at = make_phi("arctan");
  REQUIRE(at.tail_phi2 != nullptr);
  CHECK(at.tail_phi2(0.0) == 0.0);

  for (int i = 0; i <= 200; ++i) {
    double s = 10.0 * std::pow(10.0, 4.0 * i / 200.0);
    double tail = 1.0 - kTwoOverPi * (1.0 / s) * (1.0 + at.tail_phi2(1.0 / (s * s)));
    REQUIRE(tt::close(at.eval(s), tail, 1e-10));
  }
  // the same identity parametrized by epshat = 1/s, both signs
  for (int i = 1; i <= 100; ++i) {
    double eh = 0.1 * i / 100.0;
    double plus = 1.0 - kTwoOverPi * eh * (1.0 + at.tail_phi2(eh * eh));
    double minus = -1.0 - kTwoOverPi * (-eh) * (1.0 + at.tail_phi2(eh * eh));
    REQUIRE(tt::close(at.eval(1.0 / eh), plus, 1e-10));
    REQUIRE(tt::close(at.eval(-1.0 / eh), minus, 1e-10));
  }

  RegularizationFn st = make_phi("st-cubic");
  CHECK(st.tail_phi2 == nullptr);
}

TEST_CASE("regularized field interpolates the two sides") {
  NormalFormParams np = tt::params_a();
  RegularizationFn at = make_phi("arctan");
  RegularizationFn st = make_phi("st-cubic");

  // far above the layer the arctan field approaches twice the upper field
  Vec3 p_hi{0.4, 1.0, -1.5};
  Vec3 f_hi = regularized_field(np, at, 1e-6, p_hi);
  Vec3 twice_up{8.0, -3.0, 2.0};
  CHECK(tt::dist3(f_hi, twice_up) <= 1e-5 * norm(twice_up));

  // the clamped cubic reaches it exactly at finite height
  Vec3 p_st{0.4, 2e-3, -1.5};
  Vec3 f_st = regularized_field(np, st, 1e-3, p_st);
  CHECK(tt::dist3(f_st, twice_up) <= 1e-15);

  // on the plane itself both sides weigh in equally
  Vec3 mid = regularized_field(np, at, 1e-3, {0.4, 0.0, -1.5});
  CHECK(tt::close(mid[0], 4.0 - 1.0, 1e-15));
  CHECK(tt::close(mid[1], -1.5 - 0.4, 1e-15));
  CHECK(tt::close(mid[2], 1.0 + 1.0, 1e-15));

  CHECK(tt::thrown_code([&] { regularized_field(np, at, 0.0, p_hi); }) ==
        errc::nonpositive_epsilon);
  CHECK(tt::thrown_code([&] { regularized_field(np, at, -1.0, p_hi); }) ==
        errc::nonpositive_epsilon);
}

TEST_CASE("regularized Jacobian matches finite differences through the layer") {
  NormalFormParams np = tt::params_a();
  for (const char* fam : {"arctan", "st-cubic"}) {
    RegularizationFn phi = make_phi(fam);
    double eps = 1e-2;
    for (Vec3 p : {Vec3{0.4, 0.003, -1.5}, Vec3{-0.6, -0.004, 0.8}, Vec3{1.0, 0.5, 0.2}}) {
      Mat3 j = regularized_jacobian(np, phi, eps, p);
      Mat3 fd = fd_jacobian3(
          [&](const Vec3& q) { return regularized_field(np, phi, eps, q); }, p);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) REQUIRE(tt::close(j[r][c], fd[r][c], 2e-4));
    }
  }
}

TEST_CASE("the field commutes with the time-reversal conjugation") {
  Vec3 r = reversibility_conjugate({1.0, 2.0, 3.0});
  CHECK(r[0] == -1.0);
  CHECK(r[1] == 2.0);
  CHECK(r[2] == -3.0);
  Vec3 rr = reversibility_conjugate(r);
  CHECK(rr[0] == 1.0);
  CHECK(rr[2] == 3.0);

  NormalFormParams np = tt::params_a();
  std::mt19937_64 rng(7);
  auto u = [&] { return -2.0 + 4.0 * std::generate_canonical<double, 53>(rng); };
  for (const char* fam : {"arctan", "st-cubic"}) {
    RegularizationFn phi = make_phi(fam);
    for (double eps : {1.0, 1e-2}) {
      for (int k = 0; k < 100; ++k) {
        Vec3 p{u(), u(), u()};
        Vec3 lhs = regularized_field(np, phi, eps, reversibility_conjugate(p));
        Vec3 f = regularized_field(np, phi, eps, p);
        Vec3 rhs{f[0], -f[1], f[2]};
        REQUIRE(tt::dist3(lhs, rhs) <= 1e-12 * (1.0 + norm(f)));
      }
    }
  }
}

TEST_CASE("zoomed slow-fast form reduces to layer and full dynamics") {
  NormalFormParams np = tt::params_a();
  RegularizationFn at = make_phi("arctan");

  // eps = 0: only the layer component moves
  Vec3 layer = slow_fast_rhs(np, at, {-1.0, 0.3, -1.0}, 0.0, Timescale::Fast);
  CHECK(layer[0] == 0.0);
  CHECK(layer[2] == 0.0);
  double ph = at.eval(0.3);
  CHECK(tt::close(layer[1], -1.0 * (1.0 + ph) + 1.0 * (1.0 - ph), 1e-15));

  // on the critical graph the layer component vanishes, in both quadrants
  for (double sx : {-1.0, 1.0}) {
    for (int i = 1; i <= 20; ++i) {
      double x = sx * (0.2 + 0.1 * i);
      double z = sx * (0.3 + 0.07 * i);
      double yh = critical_manifold_h(np, at, z / x);
      Vec3 g = slow_fast_rhs(np, at, {x, yh, z}, 0.0, Timescale::Fast);
      REQUIRE(std::abs(g[1]) <= 1e-10 * (1.0 + std::abs(x) + std::abs(z)));
    }
  }

  // at eps = 1 the fast form is the regularized field evaluated at y = yhat
  Vec3 q{0.4, 0.37, -1.5};
  Vec3 fast = slow_fast_rhs(np, at, q, 1.0, Timescale::Fast);
  Vec3 full = regularized_field(np, at, 1.0, q);
  CHECK(tt::dist3(fast, full) <= 1e-15);

  // the slow form is the fast one divided by eps
  Vec3 f2 = slow_fast_rhs(np, at, q, 0.5, Timescale::Fast);
  Vec3 s2 = slow_fast_rhs(np, at, q, 0.5, Timescale::Slow);
  CHECK(tt::close(s2[0], f2[0] / 0.5, 1e-15));
  CHECK(tt::close(s2[1], f2[1] / 0.5, 1e-15));
  CHECK(tt::close(s2[2], f2[2] / 0.5, 1e-15));

  CHECK(tt::thrown_code([&] { slow_fast_rhs(np, at, q, 0.0, Timescale::Slow); }) ==
        errc::nonpositive_epsilon);
}

TEST_CASE("critical manifold height solves the layer equation") {
  NormalFormParams np = tt::params_a();
  RegularizationFn at = make_phi("arctan");
  RegularizationFn st = make_phi("st-cubic");

  CHECK(tt::close(critical_manifold_h(np, at, 1.0), 0.0, 1e-15));
  CHECK(tt::close(critical_manifold_h(np, st, 1.0), 0.0, 1e-15));
  CHECK(tt::close(critical_manifold_h(np, at, 2.618033988749895), -0.8465392274440481, 1e-12));

  for (int i = 1; i <= 40; ++i) {
    double s = 0.1 + 0.15 * i;
    double target = (1.0 - s) / (1.0 + s);
    REQUIRE(tt::close(at.eval(critical_manifold_h(np, at, s)), target, 1e-12));
    REQUIRE(tt::close(st.eval(critical_manifold_h(np, st, s)), target, 1e-12));
  }

  // heights blow up (arctan) or clamp to the kink (cubic) as s -> 0
  CHECK(critical_manifold_h(np, at, 1e-8) > 1e6);
  CHECK(tt::close(critical_manifold_h(np, st, 1e-12), 0.9999988452992394, 1e-9));

  CHECK(tt::thrown_code([&] { critical_manifold_h(np, at, 0.0); }) == errc::out_of_range);
  CHECK(tt::thrown_code([&] { critical_manifold_h(np, at, -2.0); }) == errc::out_of_range);
}

TEST_CASE("layer stability splits the two sliding quadrants") {
  NormalFormParams np = tt::params_a();
  RegularizationFn at = make_phi("arctan");
  RegularizationFn st = make_phi("st-cubic");

  LayerStabilityResult neg = layer_stability(np, at, -1.0, -1.0);
  CHECK(neg.kind == LayerStability::Attracting);
  CHECK(tt::close(neg.rate, -2.0 * kTwoOverPi, 1e-12));

  LayerStabilityResult pos = layer_stability(np, at, 1.0, 1.0);
  CHECK(pos.kind == LayerStability::Repelling);
  CHECK(tt::close(pos.rate, 2.0 * kTwoOverPi, 1e-12));

  LayerStabilityResult cubic = layer_stability(np, st, -1.0, -1.0);
  CHECK(cubic.kind == LayerStability::Attracting);
  CHECK(tt::close(cubic.rate, -3.0, 1e-12));

  CHECK(tt::thrown_code([&] { layer_stability(np, at, -1.0, 1.0); }) == errc::not_sliding);
}
