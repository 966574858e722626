#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "helpers.hpp"
#include "twofold/normal_form.hpp"
#include "twofold/pws.hpp"

using namespace twofold;

namespace {

PwsSystem std_system() { return make_pws_system(tt::params_a()); }

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("lie derivatives equal the y-component of each side") {
  PwsSystem sys = std_system();
  CHECK(lie_derivative(sys, Side::Plus, {1.0, 0.0, 2.0}) == 2.0);
  CHECK(lie_derivative(sys, Side::Minus, {0.0, 0.0, 5.0}) == 0.0);
  CHECK(lie_derivative(sys, Side::Minus, {-1.0, 0.0, 0.0}) == 1.0);
}

TEST_CASE("switching-plane points classify by the Lie-derivative signs") {
  PwsSystem sys = std_system();

  CHECK(classify_sigma_point(sys, {-1.0, 0.0, -1.0}).kind == SigmaKind::SlidingStable);
  CHECK(classify_sigma_point(sys, {1.0, 0.0, 1.0}).kind == SigmaKind::SlidingUnstable);
  CHECK(classify_sigma_point(sys, {2.0, 0.0, -1.0}).kind == SigmaKind::CrossingDown);
  CHECK(classify_sigma_point(sys, {-2.0, 0.0, 1.0}).kind == SigmaKind::CrossingUp);
  CHECK(classify_sigma_point(sys, {3.0, 0.0, 0.0}).kind == SigmaKind::TangencyPlus);
  CHECK(classify_sigma_point(sys, {0.0, 0.0, -1.0}).kind == SigmaKind::TangencyMinus);
  CHECK(classify_sigma_point(sys, {0.0, 0.0, 0.0}).kind == SigmaKind::TwoFold);

  SigmaClassification cl = classify_sigma_point(sys, {-1.0, 0.0, -1.0});
  CHECK(cl.lie_plus == -1.0);
  CHECK(cl.lie_minus == 1.0);

  CHECK(tt::thrown_code([&] { classify_sigma_point(sys, {0.0, 0.5, 0.0}); }) ==
        errc::point_off_sigma);
}

TEST_CASE("the four quadrants of the switching plane partition as expected") {
  PwsSystem sys = std_system();
  for (double x : grid(-1.0, 1.0, 100)) {
    for (double z : grid(-1.0, 1.0, 100)) {
      SigmaKind kind = classify_sigma_point(sys, {x, 0.0, z}).kind;
      SigmaKind want = x < 0.0 ? (z < 0.0 ? SigmaKind::SlidingStable : SigmaKind::CrossingUp)
                               : (z < 0.0 ? SigmaKind::CrossingDown : SigmaKind::SlidingUnstable);
      REQUIRE(kind == want);
    }
  }
}

TEST_CASE("sliding coefficient is the convex weight of the Filippov combination") {
  PwsSystem sys = std_system();
  CHECK(sliding_coefficient(sys, {-1.0, 0.0, -1.0}) == Catch::Approx(0.5));
  CHECK(sliding_coefficient(sys, {-2.0, 0.0, -1.0}) == Catch::Approx(2.0 / 3.0));

  for (double x : grid(-2.0, -0.1, 7)) {
    for (double z : grid(-2.0, -0.1, 7)) {
      double s = sliding_coefficient(sys, {x, 0.0, z});
      REQUIRE(s > 0.0);
      REQUIRE(s < 1.0);
    }
  }

  CHECK(tt::thrown_code([&] { sliding_coefficient(sys, {2.0, 0.0, -1.0}); }) == errc::not_sliding);
}

TEST_CASE("Filippov sliding field is tangent to the plane") {
  PwsSystem sys = std_system();

  Vec3 f = filippov_sliding_field(sys, {-1.0, 0.0, -1.0});
  CHECK(tt::close(f[0], 1.5, 1e-14));
  CHECK(tt::close(f[1], 0.0, 1e-14));
  CHECK(tt::close(f[2], 1.0, 1e-14));

  for (double x : grid(-2.0, -0.1, 7)) {
    for (double z : grid(-2.0, -0.1, 7)) {
      Vec3 fs = filippov_sliding_field(sys, {x, 0.0, z});
      REQUIRE(std::abs(fs[1]) <= 1e-12);
    }
  }

  // near the fold {x=0} the weight collapses onto the lower field
  Vec3 near = filippov_sliding_field(sys, {-1e-6, 0.0, -1.0});
  Vec3 fm = sys.x_minus({-1e-6, 0.0, -1.0});
  CHECK(tt::dist3(near, fm) < 1e-5);
}

TEST_CASE("desingularized field is the plane-projected sliding field rescaled") {
  NormalFormParams np = tt::params_a();
  PwsSystem sys = make_pws_system(np);

  Vec2 d = desingularized_sliding_field(np, -1.0, -1.0);
  CHECK(d[0] == Catch::Approx(3.0));
  CHECK(d[1] == Catch::Approx(2.0));
  Vec2 zero = desingularized_sliding_field(np, 0.0, 0.0);
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);

  // on both sliding quadrants: desing = (X-f - X+f) * (Filippov x,z parts),
  // with a positive factor on the stable quadrant and negative on the other
  auto check_quadrant = [&](double sx, double sz, bool positive) {
    for (double x : grid(0.1, 2.0, 6)) {
      for (double z : grid(0.1, 2.0, 6)) {
        Vec3 p{sx * x, 0.0, sz * z};
        double mult = lie_derivative(sys, Side::Minus, p) - lie_derivative(sys, Side::Plus, p);
        REQUIRE((positive ? mult > 0.0 : mult < 0.0));
        Vec3 f = filippov_sliding_field(sys, p);
        Vec2 desing = desingularized_sliding_field(np, p[0], p[2]);
        REQUIRE(tt::close(desing[0], mult * f[0], 1e-10 * (1.0 + std::abs(desing[0]))));
        REQUIRE(tt::close(desing[1], mult * f[2], 1e-10 * (1.0 + std::abs(desing[1]))));
      }
    }
  };
  check_quadrant(-1.0, -1.0, true);
  check_quadrant(1.0, 1.0, false);
}

TEST_CASE("fold points split into visible and invisible tangencies") {
  PwsSystem sys = std_system();
  CHECK(classify_fold(sys, {1.0, 0.0, 0.0}, Side::Plus) == FoldType::Visible);
  CHECK(classify_fold(sys, {0.0, 0.0, -1.0}, Side::Minus) == FoldType::Invisible);

  CHECK(tt::thrown_code([&] { classify_fold(sys, {0.0, 0.0, 0.0}, Side::Plus); }) ==
        errc::not_a_fold);
  CHECK(tt::thrown_code([&] { classify_fold(sys, {1.0, 0.0, 1.0}, Side::Plus); }) ==
        errc::not_a_fold);
}

TEST_CASE("finite-difference Jacobians track a smooth nonlinear field") {
  auto f = [](const Vec3& p) {
    return Vec3{std::sin(p[1]), p[0] * p[0], p[2] * p[1]};
  };
  Vec3 p{0.3, -0.7, 1.2};
  Mat3 j = fd_jacobian3(f, p);
  CHECK(tt::close(j[0][1], std::cos(p[1]), 1e-7));
  CHECK(tt::close(j[1][0], 2.0 * p[0], 1e-7));
  CHECK(tt::close(j[2][1], p[2], 1e-7));
  CHECK(tt::close(j[2][2], p[1], 1e-7));
  CHECK(tt::close(j[0][0], 0.0, 1e-7));
}

TEST_CASE("supplied Jacobians are checked against finite differences") {
  auto fp = [](const Vec3& p) { return Vec3{p[1], -p[0], 1.0}; };
  auto fm = [](const Vec3&) { return Vec3{1.0, 1.0, 1.0}; };
  auto jp = [](const Vec3&) {
    return Mat3{{Vec3{0.0, 1.0, 0.0}, Vec3{-1.0, 0.0, 0.0}, Vec3{0.0, 0.0, 0.0}}};
  };
  auto jm = [](const Vec3&) { return Mat3{}; };

  CHECK_NOTHROW(make_pws_system(fp, fm, jp, jm));

  auto jp_wrong = [](const Vec3&) {
    return Mat3{{Vec3{0.0, 1.0, 0.0}, Vec3{1.0, 0.0, 0.0}, Vec3{0.0, 0.0, 0.0}}};
  };
  CHECK(tt::thrown_code([&] { make_pws_system(fp, fm, jp_wrong, jm); }) ==
        errc::jacobian_mismatch);

  // the two-argument overload installs finite-difference Jacobians
  PwsSystem sys = make_pws_system(fp, fm);
  Mat3 j = sys.jacobian(Side::Plus)({0.2, 0.4, -0.1});
  CHECK(tt::close(j[0][1], 1.0, 1e-7));
  CHECK(tt::close(j[1][0], -1.0, 1e-7));
}
