#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "ddl/reference.hpp"
#include "ddl/solver.hpp"

using namespace ddl;

namespace {

// f(u) = u^3 / 3 - u: non-convex with sonic points at +-1.
FluxSpec cubic_flux() {
  std::vector<double> u, f, fp;
  for (int i = 0; i <= 40; ++i) {
    const double x = -2.0 + 0.1 * i;
    u.push_back(x);
    f.push_back(x * x * x / 3 - x);
    fp.push_back(x * x - 1);
  }
  return tabulated_flux(u, f, fp);
}

Field step_field(const GridSpec& g, double a, double b) {
  return Field::from_function(g, [&](const Vec& x) { return x[0] >= a && x[0] < b ? 1.0 : 0.0; });
}

}  // namespace

TEST_CASE("EO flux for Burgers has the closed form") {
  const FluxSpec f = burgers_flux();
  for (double a : {-1.5, -0.3, 0.0, 0.4, 2.0})
    for (double b : {-1.0, 0.0, 0.7}) {
      const double expect = 0.5 * std::pow(std::max(a, 0.0), 2) + 0.5 * std::pow(std::min(b, 0.0), 2);
      CHECK(engquist_osher_flux(a, b, f) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("EO flux is consistent and monotone for convex and non-convex fluxes") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-1.9, 1.9);
  for (const FluxSpec& f : {burgers_flux(), bounded_flux(), cubic_flux()}) {
    const EngquistOsher eo(f, {-1.9, 1.9});
    for (int k = 0; k < 300; ++k) {
      const double a = U(rng), b = U(rng), c = U(rng);
      CHECK(eo(a, a) == doctest::Approx(f.eval(a)[0]).epsilon(1e-12));
      const double lo = std::min(a, c), hi = std::max(a, c);
      CHECK(eo(hi, b) >= eo(lo, b) - 1e-13);  // nondecreasing in the left state
      CHECK(eo(b, hi) <= eo(b, lo) + 1e-13);  // nonincreasing in the right state
    }
  }
  const EngquistOsher cubic(cubic_flux(), {-1.9, 1.9});
  int sonic = 0;
  for (double v : cubic.sonic_points())
    if (std::abs(std::abs(v) - 1.0) < 1e-9) ++sonic;
  CHECK(sonic == 2);
}

TEST_CASE("EO steps conserve mass and respect the maximum principle") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const GridSpec g = make_grid(1, 1.0, 64);
  Field u(g);
  for (auto& v : u.values()) v = U(rng);
  for (const FluxSpec& f : {burgers_flux(), cubic_flux()}) {
    Field v = u;
    for (int s = 0; s < 50; ++s) {
      const Field w = reference_step(v, reference_dt(v, f), f);
      CHECK(w.integral() == doctest::Approx(u.integral()).epsilon(1e-12));
      CHECK(w.max() <= u.max() + 1e-14);
      CHECK(w.min() >= u.min() - 1e-14);
      v = w;
    }
  }
}

TEST_CASE("one EO step satisfies the discrete Kruzkov inequalities") {
  const GridSpec g = make_grid(1, 4.0, 256);
  const Field u = step_field(g, 1.0, 2.0);
  const FluxSpec f = burgers_flux();
  const double dt = reference_dt(u, f);
  const Field v = reference_step(u, dt, f);
  for (double k : {-0.5, 0.0, 0.25, 0.5, 0.9, 1.2})
    CHECK(max_discrete_entropy_residual(u, v, dt, f, k) <= 1e-12);
}

TEST_CASE("exact Burgers Riemann solution") {
  const RiemannData shock{1.0, 0.0, burgers_flux()};
  CHECK(burgers_riemann_exact(shock, 0.49) == 1.0);
  CHECK(burgers_riemann_exact(shock, 0.51) == 0.0);
  const RiemannData fan{-1.0, 2.0, burgers_flux()};
  CHECK(burgers_riemann_exact(fan, -2.0) == -1.0);
  CHECK(burgers_riemann_exact(fan, 0.3) == doctest::Approx(0.3));
  CHECK(burgers_riemann_exact(fan, 2.5) == 2.0);
  CHECK_THROWS_AS(RiemannData({1.0, 0.0, burgers_flux(2)}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(burgers_riemann_exact({1.0, 0.0, bounded_flux()}, 0.0), std::invalid_argument);
}

TEST_CASE("EO reference against the exact shock at N = 8192 is within 5 dx") {
  const GridSpec g = make_grid(1, 4.0, 8192);
  const double T = 0.5;
  const Field ref = reference_solve(step_field(g, 1.0, 2.0), burgers_flux(), T);
  const RiemannData shock{1.0, 0.0, burgers_flux()};
  double err = 0.0;
  for (int i = 0; i < g.n[0]; ++i) {
    const double x = g.coord(0, i);
    if (x < 1.75 || x > 2.75) continue;
    err += std::abs(ref.at(i) - burgers_riemann_exact(shock, (x - 2.0) / T)) * g.dx(0);
  }
  CHECK(err <= 5.0 * g.dx(0));
}

TEST_CASE("reference trajectory sampling") {
  const GridSpec g = make_grid(1, 4.0, 128);
  const Trajectory t = reference_trajectory(step_field(g, 1.0, 2.0), burgers_flux(), 0.4, 4);
  REQUIRE(t.size() == 5);
  CHECK(t.back().t == doctest::Approx(0.4));
  CHECK(t.params().role == "reference");
  const Field direct = reference_solve(step_field(g, 1.0, 2.0), burgers_flux(), 0.4);
  CHECK(lp_norm(direct - t.back().u, 1.0) < 1e-2);
}

TEST_CASE("2-D reference step on x-only data matches the 1-D step row by row") {
  const GridSpec g1 = make_grid(1, 2.0, 32);
  const GridSpec g2 = make_grid(2, 2.0, 32);
  const Field u1 = bump_data({1.0, 0.0}, 0.5)(g1);
  const Field u2 = Field::from_function(g2, [&](const Vec& x) {
    return u1.at(std::min(31, static_cast<int>(x[0] / g1.dx(0))));
  });
  const double dt = 1e-3;
  const Field v1 = reference_step(u1, dt, burgers_flux());
  const Field v2 = reference_step(u2, dt, burgers_flux(2));
  for (int j = 0; j < 32; j += 7)
    for (int i = 0; i < 32; ++i) CHECK(v2.at(i, j) == doctest::Approx(v1.at(i)).epsilon(1e-13));
}

TEST_CASE("cell averaging") {
  const GridSpec fine = make_grid(1, 2.0, 64), coarse = make_grid(1, 2.0, 16);
  const Field u = bump_data({1.0, 0.0}, 0.6)(fine);
  const Field a = cell_average(u, coarse);
  CHECK(a.integral() == doctest::Approx(u.integral()).epsilon(1e-13));
  CHECK(a.at(3) == doctest::Approx((u.at(12) + u.at(13) + u.at(14) + u.at(15)) / 4.0));
  CHECK(cell_average(Field(fine, 3.0), coarse).min() == doctest::Approx(3.0));
  CHECK_THROWS_AS(cell_average(u, make_grid(1, 2.0, 24)), std::invalid_argument);
  CHECK_THROWS_AS(cell_average(u, make_grid(1, 2.5, 16)), std::invalid_argument);
}
