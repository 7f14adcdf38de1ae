#include <cmath>
#include <numbers>

#include "calabi/flow.hpp"
#include "doctest.h"

using namespace calabi;
using std::numbers::pi;

namespace {

ScalarField cosine(const PeriodicGrid& g, double a) {
  return sample(
      [a, &g](const Point& x) {
        double v = 0.0;
        for (int k = 0; k < g.dim(); ++k) v += a * std::cos(pi * x[k]);
        return v;
      },
      g);
}

// Symbolic S for u'' = 1 - a pi^2 cos(pi x).
double cosine_curvature(double x, double a) {
  const double w0 = 1.0 - a * pi * pi * std::cos(pi * x);
  const double w1 = a * pi * pi * pi * std::sin(pi * x);
  const double w2 = a * pi * pi * pi * pi * std::cos(pi * x);
  return -(2.0 * w1 * w1 / (w0 * w0 * w0) - w2 / (w0 * w0));
}

FlowConfig quiet(double t_end, double sigma = 0.5) {
  FlowConfig c;
  c.t_end = t_end;
  c.dt_safety = sigma;
  c.monitor_every = 1 << 30;
  return c;
}

// Sup errors of the final periodic parts at the given step-size factors,
// measured against a much finer explicit RK4 run.
std::vector<double> convergence_errors(Integrator integrator, int n, double amp, std::initializer_list<double> sigmas) {
  const PeriodicGrid g(1, n);
  const SymplecticPotential u{cosine(g, amp)};
  FlowConfig c = quiet(1.0 / 64.0);
  c.adaptive = false;
  c.integrator = Integrator::kRk4;
  c.dt_safety = 1e-4;
  const auto reference = run(u, c).state.pot.periodic;
  c.integrator = integrator;
  std::vector<double> errors;
  for (double s : sigmas) {
    c.dt_safety = s;
    const auto r = run(u, c);
    REQUIRE(r.state.status == FlowStatus::kCompleted);
    errors.push_back((r.state.pot.periodic - reference).max_abs());
  }
  return errors;
}

}  // namespace

TEST_SUITE("flow") {
  TEST_CASE("config validation") {
    FlowConfig c;
    CHECK_NOTHROW(c.validate());
    c.dt_safety = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = FlowConfig{};
    c.t_end = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = FlowConfig{};
    c.monitor_every = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(FlowConfig{}.base_dt(PeriodicGrid(1, 16)) == 0.5 * std::pow(0.125, 4));
  }

  TEST_CASE("Euler substep matches the symbolic curvature") {
    const PeriodicGrid g(1, 128);
    const double a = 0.05, dt = 1e-3;
    const auto next = euler_substep(SymplecticPotential{cosine(g, a)}, dt);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.point(i)[0];
      err = std::max(err, std::abs(next.periodic[i] - (a * std::cos(pi * x) - dt * cosine_curvature(x, a))));
    }
    CHECK(err < 1e-10);
  }

  TEST_CASE("the flat potential is a fixed point") {
    const PeriodicGrid g(2, 16);
    const auto r = run(SymplecticPotential::flat(g), quiet(0.01));
    CHECK(r.state.status == FlowStatus::kCompleted);
    CHECK(r.state.t == doctest::Approx(0.01));
    CHECK(r.state.pot.periodic.max_abs() < 1e-12);
    for (const auto& row : r.log.rows) {
      CHECK(row.calabi < 1e-12);
      CHECK(row.max_rm < 1e-12);
    }
  }

  TEST_CASE("initial state has zero mean") {
    const PeriodicGrid g(1, 16);
    auto f = cosine(g, 0.02);
    f.shift(3.0);
    const auto s = initial_state(SymplecticPotential{f});
    CHECK(std::abs(s.pot.periodic.mean()) < 1e-15);
    CHECK(s.status == FlowStatus::kRunning);
  }

  TEST_CASE("Calabi energy is dissipated and the mean is kept") {
    const PeriodicGrid g(2, 32);
    const auto f = sample([](const Point& x) { return 0.03 * std::cos(pi * x[0]) * std::cos(pi * x[1]) + 0.02 * std::sin(pi * x[1]); }, g);
    FlowConfig c = quiet(0.002);
    c.monitor_every = 10;
    const auto r = run(SymplecticPotential{f}, c);
    REQUIRE(r.state.status == FlowStatus::kCompleted);
    REQUIRE(r.log.rows.size() > 3);
    for (std::size_t i = 1; i < r.log.rows.size(); ++i) {
      CHECK(r.log.rows[i].calabi <= r.log.rows[i - 1].calabi * (1.0 + 1e-8));
      CHECK(r.log.rows[i].dist_flat <= r.log.rows[i - 1].dist_flat + 1e-12);
    }
    CHECK(std::abs(r.state.pot.periodic.mean()) < 1e-14);
  }

  TEST_CASE("explicit RK4 converges at fourth order") {
    const auto e = convergence_errors(Integrator::kRk4, 8, 0.045, {0.002, 0.001});
    CAPTURE(e[0]);
    CAPTURE(e[1]);
    CHECK(e[0] / e[1] == doctest::Approx(16.0).epsilon(0.25));
  }

  TEST_CASE("ETDRK4 converges under step refinement") {
    // The frozen linear part only approximates the stiff operator, so the
    // observed order sits between two and four; require at least two.
    const auto e = convergence_errors(Integrator::kEtdRk4, 16, 0.03, {1.0, 0.5, 0.25, 0.125, 0.0625});
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] < e[i - 1]);
    CHECK(e.front() / e.back() >= 256.0);
  }

  TEST_CASE("integrators agree") {
    const PeriodicGrid g(1, 16);
    const SymplecticPotential u{cosine(g, 0.03)};
    FlowConfig a = quiet(1.0 / 64.0, 0.01);
    FlowConfig b = a;
    b.integrator = Integrator::kRk4;
    b.dt_safety = 0.002;
    CHECK((run(u, a).state.pot.periodic - run(u, b).state.pot.periodic).max_abs() < 1e-9);
  }

  TEST_CASE("step advances by the base step and stops at t_end") {
    const PeriodicGrid g(1, 16);
    const FlowConfig c = quiet(1e-3);
    auto s = initial_state(SymplecticPotential{cosine(g, 0.03)});
    s = step(s, c);
    CHECK(s.dt == c.base_dt(g));
    CHECK(s.step_count == 1);
    while (s.status == FlowStatus::kRunning) s = step(s, c);
    CHECK(s.status == FlowStatus::kCompleted);
    CHECK(s.t == doctest::Approx(1e-3).epsilon(1e-12));
  }

  TEST_CASE("convexity loss is terminal") {
    const PeriodicGrid g(1, 32);
    const auto s = step(initial_state(SymplecticPotential{cosine(g, 0.2)}), quiet(0.01));
    CHECK(s.status == FlowStatus::kBlowup);
    CHECK(s.terminal());
    CHECK(s.message.find("blowup") != std::string::npos);
    CHECK_THROWS_AS(step(s, quiet(0.01)), std::invalid_argument);
    CHECK_THROWS_AS(run(SymplecticPotential{cosine(g, 0.2)}, quiet(0.01)), std::domain_error);
  }

  TEST_CASE("Mabuchi distance between two flows does not grow") {
    const PeriodicGrid g(1, 32);
    const SymplecticPotential a{cosine(g, 0.04)};
    const SymplecticPotential b{sample([](const Point& x) { return 0.03 * std::sin(pi * x[0]) + 0.01 * std::cos(2 * pi * x[0]); }, g)};
    FlowConfig c = quiet(0.005);
    c.monitor_every = 20;
    std::vector<SymplecticPotential> sa, sb;
    run(a, c, [&](const FlowState& s, const MonitorRow&) { sa.push_back(s.pot); });
    run(b, c, [&](const FlowState& s, const MonitorRow&) { sb.push_back(s.pot); });
    REQUIRE(sa.size() == sb.size());
    const double d0 = mabuchi_distance(sa.front(), sb.front());
    for (std::size_t i = 0; i < sa.size(); ++i) CHECK(mabuchi_distance(sa[i], sb[i]) <= d0 + 1e-6);
  }

  TEST_CASE("curvature bound predicates") {
    CHECK(curvature_bound_t2(1e9, 1.0, 0.0));
    CHECK(curvature_bound_t2(3.9, 1.0, 0.5));
    CHECK_FALSE(curvature_bound_t2(4.0, 1.0, 0.5));
    CHECK(curvature_bound_t2(1.5, 2.0, 4.0));
    CHECK(curvature_bound_sqrt(0.99, 1.0, 0.5));
    CHECK_FALSE(curvature_bound_sqrt(1.0, 1.0, 0.5));
    CHECK(curvature_bound_sqrt(9.9, 1.0, 0.005));
  }

  TEST_CASE("rescale") {
    const PeriodicGrid g(2, 32);
    const auto f = sample([](const Point& x) { return 0.02 * std::cos(pi * x[0]) + 0.015 * std::sin(pi * (x[0] + x[1])); }, g);
    const SymplecticPotential u{f};

    CHECK_THROWS_AS(rescale(u, 0.5, {0.0, 0.0}), std::invalid_argument);
    const auto same = rescale(u, 1.0, {0.0, 0.0});
    CHECK((same.periodic - u.periodic).max_abs() < 1e-14);

    const auto flat = rescale(SymplecticPotential::flat(g), 4.0, {0.0, 0.0});
    CHECK(flat.grid().half_length() == 4.0);
    CHECK(flat.quadratic == 0.25);
    CHECK(flat.periodic.max_abs() == 0.0);

    // With x0 = 0 node i of the rescaled grid is 4 times node i of the original.
    const auto v = rescale(u, 4.0, {0.0, 0.0});
    const auto Su = abreu_scalar_curvature(u), Sv = abreu_scalar_curvature(v);
    const auto Ru = riemann_norm(u), Rv = riemann_norm(v);
    double s_err = 0.0, r_err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      s_err = std::max(s_err, std::abs(Sv[i] - 0.25 * Su[i]));
      r_err = std::max(r_err, std::abs(Rv[i] - 0.25 * Ru[i]));
    }
    CHECK(s_err < 1e-9);
    CHECK(r_err < 1e-9);

    // A translated rescaling shifts the curvature by x0 / lambda.
    const double shift = 4.0 * 4 * g.spacing();  // four nodes of the original
    const auto w = rescale(u, 4.0, {shift, 0.0});
    const auto Sw = abreu_scalar_curvature(w);
    double t_err = 0.0;
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j)
        t_err = std::max(t_err, std::abs(Sw[g.flat_index(i, j)] - 0.25 * Su[g.flat_index((i + 28) % 32, j)]));
    CHECK(t_err < 1e-9);
  }

  TEST_CASE("gradient bound over the doubled box") {
    CHECK(gradient_bound(SymplecticPotential::flat(PeriodicGrid(2, 16))) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    const PeriodicGrid g(1, 64);
    CHECK(gradient_bound(SymplecticPotential{cosine(g, 0.05)}) == doctest::Approx(2.0).epsilon(1e-10));
    const auto scaled = rescale(SymplecticPotential::flat(PeriodicGrid(1, 16)), 2.0, {0.0, 0.0});
    // |x| / 2 on [-4, 4].
    CHECK(gradient_bound(scaled) == doctest::Approx(2.0).epsilon(1e-14));
  }

  TEST_CASE("monitor csv") {
    const PeriodicGrid g(1, 16);
    MonitorLog log;
    log.rows.push_back(monitor(initial_state(SymplecticPotential::flat(g)), FlowConfig{}));
    CHECK(log.to_csv() == MonitorLog::csv_header() + "\n0,0,0,0,0,1,1,1,0\n");
    CHECK(to_string(FlowStatus::kStiff) == "stiff");
  }
}
