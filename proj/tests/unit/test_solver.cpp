#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ddl/reference.hpp"
#include "ddl/solver.hpp"

using namespace ddl;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

double sum(const Field& u) {
  double s = 0.0;
  for (double v : u.values()) s += v;
  return s;
}

}  // namespace

TEST_CASE("parameter validation") {
  SolveParams p;
  CHECK_NOTHROW(validate(p));
  p.epsilon = -1.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = SolveParams{};
  p.cfl_safety = 1.5;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = SolveParams{};
  p.sample_count = 0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = SolveParams{};
  p.flux = burgers_flux(2);
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("right-hand side of a constant state vanishes") {
  SolveParams p;
  p.flux = burgers_flux();
  p.epsilon = 0.1;
  p.delta = 0.01;
  const Field c(make_grid(1, 1.0, 16), 0.7);
  CHECK(rhs(c, p).max_abs() == 0.0);
}

TEST_CASE("advection right-hand side has the centred symbol") {
  SolveParams p;
  p.flux = linear_flux(2.0);
  const GridSpec g = make_grid(1, kTwoPi, 32);
  const double h = g.dx(0);
  const Field u = sine_data()(g);
  const Field r = rhs(u, p);
  for (int i = 0; i < 32; ++i)
    CHECK(r.at(i) == doctest::Approx(-2.0 * std::sin(h) / h * std::cos(g.coord(0, i))).epsilon(1e-12));
}

TEST_CASE("stable step sizes for each active term") {
  const GridSpec g = make_grid(1, 1.0, 100);
  const double h = 0.01;
  SolveParams p;
  p.cfl_safety = 0.5;
  CHECK(stable_dt(p, g, 1.0, 0.0) == doctest::Approx(0.5 * h));  // nothing active
  p.flux = burgers_flux();
  CHECK(stable_dt(p, g, 2.0, 0.0) == doctest::Approx(0.5 * h / 2.0));
  p.flux = zero_flux();
  p.epsilon = 0.1;
  CHECK(stable_dt(p, g, 1.0, 3.0) == doctest::Approx(0.5 * h * h / (2.0 * 0.1)));
  p.epsilon = 0.0;
  p.delta = -1e-3;
  CHECK(stable_dt(p, g, 1.0, 0.0) == doctest::Approx(0.5 * h * h * h / (4.0 * 1e-3)));
  // All together: the smallest limit wins.
  p.flux = burgers_flux();
  p.epsilon = 0.1;
  CHECK(stable_dt(p, g, 1.0, 0.0) == doctest::Approx(0.5 * h * h * h / (4.0 * 1e-3)));
}

TEST_CASE("one RK4 step on a heat mode multiplies by the RK4 polynomial") {
  SolveParams p;
  p.epsilon = 0.3;
  const GridSpec g = make_grid(1, kTwoPi, 16);
  const double h = g.dx(0);
  const Field u = sine_data()(g);
  const double dt = 0.01;
  const double z = -p.epsilon * std::sin(h) * std::sin(h) / (h * h) * dt;
  const double R = 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24;
  const Field v = step_rk4(u, dt, p);
  for (int i = 0; i < 16; ++i) CHECK(v.at(i) == doctest::Approx(R * u.at(i)).epsilon(1e-13));
}

TEST_CASE("snapshots land on the sample times and mass is conserved") {
  SolveParams p;
  p.flux = burgers_flux();
  p.epsilon = 0.02;
  p.delta = 1e-5;
  p.t_end = 0.3;
  p.sample_count = 7;
  const GridSpec g = make_grid(1, 2.0, 128);
  const Trajectory t = solve(bump_data({1.0, 0.0}, 0.4), p, g);
  REQUIRE(t.size() == 8);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(t.samples()[k].t == doctest::Approx(0.3 * k / 7).epsilon(1e-15));
  const double m0 = sum(t.front().u);
  for (const auto& s : t.samples()) CHECK(sum(s.u) == doctest::Approx(m0).epsilon(1e-12));
  CHECK(t.steps > 0);
  CHECK(t.dt_min > 0.0);
  CHECK_FALSE(t.flags().blowup);
  CHECK_FALSE(t.flags().dispersive_regime);
  CHECK(t.params().scheme == "centered-fd/rk4");
}

TEST_CASE("dispersive runs are flagged and conserve the discrete L2 norm") {
  SolveParams p;
  p.delta = 1e-3;
  p.t_end = 0.5;
  const GridSpec g = make_grid(1, kTwoPi, 64);
  const Trajectory t = solve(sine_data(1.0, 2), p, g);
  CHECK(t.flags().dispersive_regime);
  CHECK(lp_norm(t.back().u, 2.0) == doctest::Approx(lp_norm(t.front().u, 2.0)).epsilon(1e-9));
}

TEST_CASE("anti-diffusion blows up and keeps the partial trajectory") {
  SolveParams p;
  p.epsilon = 0.05;
  p.diffusion.eval = [](const Vec& l) { return Vec{-l[0], 0.0}; };
  p.t_end = 2.0;
  p.sample_count = 20;
  const GridSpec g = make_grid(1, kTwoPi, 256);
  const Trajectory t = solve(bump_data({std::numbers::pi, 0.0}, 1.0), p, g);
  CHECK(t.flags().blowup);
  CHECK(t.size() < 21);
  CHECK(t.flags().blowup_max > 0.0);
}

TEST_CASE("initial data covering most of the box is rejected") {
  SolveParams p;
  const GridSpec g = make_grid(1, 1.0, 64);
  CHECK_THROWS_AS(solve(bump_data({0.5, 0.0}, 0.45), p, g), std::invalid_argument);
  CHECK_NOTHROW(solve(bump_data({0.5, 0.0}, 0.3), p, g));
}

TEST_CASE("reaching the periodic seam taints the run") {
  SolveParams p;
  p.flux = linear_flux(1.0);
  p.epsilon = 0.01;
  p.t_end = 0.5;
  const GridSpec g = make_grid(1, 1.0, 64);
  const Trajectory t = solve(bump_data({0.6, 0.0}, 0.2), p, g);
  CHECK(t.flags().tainted);
  CHECK(t.flags().taint_time > 0.0);

  p.t_end = 0.05;
  const Trajectory quiet = solve(bump_data({0.4, 0.0}, 0.2), p, g);
  CHECK_FALSE(quiet.flags().tainted);
}

TEST_CASE("support fraction and declared norms") {
  const GridSpec g = make_grid(1, 1.0, 100);
  Field u(g, 2.0);
  for (int i = 10; i < 30; ++i) u.at(i) = 3.0;
  CHECK(support_fraction(u, 2.0) == doctest::Approx(0.2));
  CHECK(support_fraction(Field(g, 2.0), 2.0) == 0.0);
  const InitialNorms n = declared_norms(Field(g, 2.0), {4.0});
  CHECK(n.l1 == doctest::Approx(2.0));
  CHECK(n.l2 == doctest::Approx(2.0));
  CHECK(n.lq.at(0).second == doctest::Approx(2.0));
}

TEST_CASE("smoothed Riemann data: plateau, background and edges") {
  const GridSpec g = make_grid(1, 4.0, 400);
  const InitialData d = smoothed_riemann_data(1.0, 0.0, 0.02, 1.0, 2.0);
  const Field u = d(g);
  CHECK(d.background == 0.0);
  CHECK(u.at(150) == doctest::Approx(1.0));  // x = 1.505
  CHECK(u.at(350) == doctest::Approx(0.0));
  CHECK(u.at(99) == doctest::Approx(0.5).epsilon(0.2));  // x = 0.995, left edge
  CHECK_THROWS_AS(smoothed_riemann_data(1.0, 0.0, 0.0, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("smooth viscous Burgers converges against a fine self-reference") {
  SolveParams p;
  p.flux = burgers_flux();
  p.epsilon = 0.05;
  p.t_end = 0.4;
  auto final = [&](int n) { return solve(bump_data({1.0, 0.0}, 0.5), p, make_grid(1, 2.0, n)).back().u; };
  const Field ref = final(2048);
  auto err = [&](int n) {
    const Field u = final(n);
    return lp_norm(u - cell_average(ref, u.grid()), 1.0);
  };
  CHECK(err(128) / err(256) >= 3.0);
}
