#include <cmath>
#include <numbers>

#include "calabi/bounds.hpp"
#include "calabi/geometry.hpp"
#include "doctest.h"

using namespace calabi;
using std::numbers::pi;

namespace {

ConvexSample flat_jet(const Point& x) {
  ConvexSample s;
  s.x = x;
  s.value = 0.5 * (x[0] * x[0] + x[1] * x[1]);
  s.gradient = std::array<double, 2>{x[0], x[1]};
  s.hessian = std::array<double, 3>{1.0, 0.0, 1.0};
  s.abreu = 0.0;
  return s;
}

// u = (x^4 + y^4)/4 + eps |x|^2 / 2, strictly convex for eps > 0.
ConvexModel softened_quartic(double eps) {
  return [eps](const Point& x) {
    ConvexSample s;
    s.x = x;
    s.value = 0.25 * (std::pow(x[0], 4) + std::pow(x[1], 4)) + 0.5 * eps * (x[0] * x[0] + x[1] * x[1]);
    s.gradient = std::array<double, 2>{std::pow(x[0], 3) + eps * x[0], std::pow(x[1], 3) + eps * x[1]};
    s.hessian = std::array<double, 3>{3 * x[0] * x[0] + eps, 0.0, 3 * x[1] * x[1] + eps};
    // d_i d_i (1 / (3 x_i^2 + eps)) summed over i.
    double a = 0.0;
    for (double t : {x[0], x[1]}) {
      const double d = 3 * t * t + eps;
      a += 72 * t * t / (d * d * d) - 6 / (d * d);
    }
    s.abreu = a;
    return s;
  };
}

// Root of x^4 - 4 x^3 - 1 near 4 by Newton's method.
double quartic_root() {
  double x = 4.0;
  for (int i = 0; i < 50; ++i) x -= (x * x * x * x - 4 * x * x * x - 1) / (4 * x * x * x - 12 * x * x);
  return x;
}

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("ball and sphere measures") {
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
    CHECK(unit_ball_volume(2) == doctest::Approx(pi));
    CHECK(unit_sphere_area(1) == doctest::Approx(2.0));
    CHECK(unit_sphere_area(2) == doctest::Approx(2 * pi));
  }

  TEST_CASE("growth exponent") {
    // 1.1 * 9 * 8 / (4 (2^1.5 - 1)^2) = 5.92...
    CHECK(prop31_exponent(1.1, 1.0, 2) == 6);
    // 1458 (9 + 4 sqrt 2) / 49 = 436.12...
    const double bracket = 1458.0 * (9.0 + 4.0 * std::sqrt(2.0)) / 49.0;
    CHECK(prop31_exponent(1.0, 81.0, 2) == static_cast<long>(bracket) + 1);
    CHECK(prop31_exponent(1.0, 81.0, 2) == 437);
  }

  TEST_CASE("ledger for unit parameters") {
    const SpecialConvexParams p{1.0, 1.0, 1.0, 2};
    const auto l = constants(p);
    CHECK(l.C1 == doctest::Approx(4 * pi).epsilon(1e-15));
    CHECK(l.C2 == doctest::Approx(5 * pi).epsilon(1e-15));
    CHECK(l.C3 == doctest::Approx(81.0).epsilon(1e-15));
    CHECK(l.exponent == 437);
    CHECK(l.R0 == std::ldexp(1.0, 438));
    CHECK(l.max_radius == 1.0 + std::ldexp(1.0, 438));
    CHECK(l.lambda == 2.0 + std::ldexp(1.0, 438));
    int e = 0;
    CHECK(std::frexp(l.R0 / (2 * p.M), &e) == 0.5);
  }

  TEST_CASE("ledger monotonicity") {
    for (double M : {0.5, 1.0, 2.0}) {
      for (double CE : {0.5, 1.0, 2.0}) {
        CAPTURE(M);
        CAPTURE(CE);
        const auto base = constants({M, 1.0, CE, 2});
        const auto bigger_m = constants({2 * M, 1.0, CE, 2});
        const auto bigger_e = constants({M, 1.0, 2 * CE, 2});
        const auto smaller_c0 = constants({M, 0.5, CE, 2});
        CHECK(bigger_m.C3 >= base.C3);
        CHECK(bigger_m.R0 >= base.R0);
        CHECK(bigger_e.C2 > base.C2);
        CHECK(bigger_e.R0 >= base.R0);
        CHECK(smaller_c0.C3 > base.C3);
        // 2M 2^exponent either is a power of two times 2M or overflows.
        if (base.exponent + std::log2(2 * M) < 1023) {
          int ex = 0;
          CHECK(std::frexp(base.R0 / (2 * M), &ex) == 0.5);
        } else {
          CHECK(std::isinf(base.R0));
        }
      }
    }
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(constants({0.0, 1.0, 1.0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(constants({1.0, -1.0, 1.0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(constants({1.0, 1.0, 1.0, 0}), std::invalid_argument);
  }

  TEST_CASE("ledger output") {
    const SpecialConvexParams p{1.0, 1.0, 1.0, 2};
    const auto l = constants(p);
    CHECK(ledger_csv_header() == "M,C0,CE,n,C1,C2,C3,R0,max_radius,lambda");
    const std::string row = ledger_csv_row(p, l);
    CHECK(row.rfind("1,1,1,2,12.566370614359172,15.707963267948966,81,", 0) == 0);
    const std::string text = ledger_text(p, l);
    CHECK(text.find("C3") != std::string::npos);
    CHECK(text.find("81") != std::string::npos);
  }

  TEST_CASE("growth search on x^2") {
    const auto r = prop31_search([](double x) { return x * x; }, 1e4, 200001, 1.1, 1.0, 2);
    CHECK(r.ceiling == 64.0);
    REQUIRE(r.x0.has_value());
    CHECK(*r.x0 <= r.ceiling);
    CHECK(r.within_ceiling);
    // int_1^x t^3 dt = x^3 <=> x^4 - 4 x^3 - 1 = 0.
    CHECK(*r.x0 == doctest::Approx(quartic_root()).epsilon(1e-4));
    CHECK(r.inverse_integral + r.tail_estimate == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("growth search in one dimension") {
    // int_1^x t^2 dt = (x^3 - 1)/3 exceeds 1e-3 x^2 just above x = 1.
    const auto x = log_spaced(10.0, 20001);
    std::vector<double> f(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) f[i] = x[i] * x[i];
    const auto r = prop31_search(x, f, 1.1, 1e-3, 1);
    REQUIRE(r.x0.has_value());
    const double found = *r.x0;
    CHECK((found * found * found - 1.0) / 3.0 > 1e-3 * found * found * (1.0 - 1e-6));
    CHECK(found < 1.002);
  }

  TEST_CASE("growth search rejects bad input") {
    CHECK_THROWS_AS(prop31_search([](double) { return 1.0; }, 100.0, 100, 1.1, 1.0, 2), std::invalid_argument);
    const std::vector<double> x{0.5, 1.0, 2.0}, f{1.0, 1.0, 4.0};
    CHECK_THROWS_AS(prop31_search(x, f, 1.1, 1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(log_spaced(0.5, 10), std::invalid_argument);
  }

  TEST_CASE("polar sampling") {
    const auto s = sample_polar(flat_jet, 2, 2.0, 4, 8);
    CHECK(s.nodes.size() == 32);
    CHECK(s.radius_of(0) == 0.25);
    CHECK(s.radius_of(31) == 1.75);
    double area = 0.0;
    for (std::size_t k = 0; k < s.nodes.size(); ++k) area += s.weight(k);
    CHECK(area == doctest::Approx(4 * pi));
    const auto s1 = sample_polar(flat_jet, 1, 2.0, 4, 8);
    CHECK(s1.direction_count == 2);
    CHECK(s1.nodes[1].x[0] == -0.25);
  }

  TEST_CASE("special check on the flat potential") {
    const auto s = sample_polar(flat_jet, 2, 3.0, 60, 32);
    const auto r = special_check(s, {4.0, 0.5, 1.0, 2});
    CHECK(r.all());
    CHECK(r.max_gradient == doctest::Approx(s.radius_of(s.nodes.size() - 1)));
    CHECK(r.min_radial_derivative >= 1.0);
    CHECK(r.curvature_energy == 0.0);

    const auto tight = special_check(s, {2.0, 0.5, 1.0, 2});
    CHECK_FALSE(tight.gradient);
    const auto steep = special_check(s, {4.0, 1.5, 1.0, 2});
    CHECK_FALSE(steep.radial);
  }

  TEST_CASE("gauge condition") {
    auto shifted = [](const Point& x) {
      auto s = flat_jet({x[0] - 0.3, x[1]});
      s.x = x;
      return s;
    };
    const auto s = sample_polar(shifted, 2, 3.0, 30, 16);
    CHECK_FALSE(special_check(s, {8.0, 0.1, 1.0, 2}, false).gauge);
    const auto fixed = special_check(s, {8.0, 0.1, 1.0, 2}, true);
    CHECK(fixed.gauge);
    CHECK(fixed.gauge_residual < 1e-15);

    auto partial = s;
    partial.nodes[3].hessian.reset();
    CHECK_THROWS_AS(special_check(partial, {8.0, 0.1, 1.0, 2}), std::invalid_argument);
  }

  TEST_CASE("curvature energy of the softened quartic") {
    const auto s = sample_polar(softened_quartic(0.5), 2, 2.0, 200, 64);
    const auto r = special_check(s, {100.0, 0.1, 100.0, 2});
    CHECK(r.convex);
    CHECK(r.curvature_energy > 0.0);
  }

  TEST_CASE("inequality on the flat potential") {
    // u = r^2/2, R = 1: -2 int (u-1)^3 = pi, ||(u-1)^4||_2 = sqrt(2 pi / 9),
    // int |x|^2 (u-1)^2 = pi / 3.
    const auto s = sample_polar(flat_jet, 2, 2.0, 800, 128);
    const double CE = 1.0;
    const auto r = inequality_check(s, 1.0, CE);
    CHECK(r.lhs == doctest::Approx(pi + 0.25 * CE * std::sqrt(2 * pi / 9)).epsilon(1e-4));
    CHECK(r.rhs == doctest::Approx(pi / 3).epsilon(1e-4));
    CHECK(r.ok);

    CHECK_THROWS_AS(inequality_check(s, 0.0, CE), std::invalid_argument);
    CHECK_THROWS_AS(inequality_check(s, 3.0, CE), std::invalid_argument);
  }

  TEST_CASE("inequality on the softened quartic under refinement") {
    double previous_gap = -1.0;
    for (int k : {1, 2, 4}) {
      CAPTURE(k);
      const auto s = sample_polar(softened_quartic(0.2), 2, 1.5, 100 * k, 32 * k);
      const auto r = inequality_check(s, 0.5, 1.0);
      CHECK(r.ok);
      const double gap = r.lhs - r.rhs;
      if (previous_gap > 0.0) CHECK(gap == doctest::Approx(previous_gap).epsilon(1e-2));
      previous_gap = gap;
    }
  }

  TEST_CASE("potential model") {
    const PeriodicGrid g(2, 32);
    const auto f = sample([](const Point& x) { return 0.03 * std::cos(pi * x[0]); }, g);
    const auto model = potential_model(SymplecticPotential{f});
    const auto s = model({0.25, -0.5});
    CHECK(s.value == doctest::Approx(0.03 * std::cos(pi * 0.25) + 0.5 * (0.0625 + 0.25)).epsilon(1e-12));
    CHECK((*s.gradient)[0] == doctest::Approx(-0.03 * pi * std::sin(pi * 0.25) + 0.25).epsilon(1e-11));
    CHECK((*s.hessian)[0] == doctest::Approx(1.0 - 0.03 * pi * pi * std::cos(pi * 0.25)).epsilon(1e-10));
    const double w = 1.0 - 0.03 * pi * pi * std::cos(pi * 0.25);
    const double w1 = 0.03 * pi * pi * pi * std::sin(pi * 0.25);
    const double w2 = 0.03 * pi * pi * pi * pi * std::cos(pi * 0.25);
    CHECK(*s.abreu == doctest::Approx(2 * w1 * w1 / (w * w * w) - w2 / (w * w)).epsilon(1e-8));
  }
}
