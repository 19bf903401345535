#include <cmath>
#include <vector>

#include "doctest.h"
#include "ddl/model.hpp"

using namespace ddl;

TEST_CASE("scalar fluxes evaluate with their derivatives") {
  const FluxSpec b = burgers_flux();
  CHECK(b.eval(3.0)[0] == doctest::Approx(4.5));
  CHECK(b.deriv(-2.0)[0] == -2.0);
  CHECK(b.growth_exponent == 2.0);

  const FluxSpec lin = linear_flux(-0.5, 2);
  CHECK(lin.eval(2.0)[0] == -1.0);
  CHECK(lin.eval(2.0)[1] == -1.0);

  const FluxSpec bd = bounded_flux();
  for (double u : {-50.0, -1.0, 0.0, 3.0, 1e3}) CHECK(std::abs(bd.deriv(u)[0]) < 1.0);

  CHECK(zero_flux().eval(7.0)[0] == 0.0);
}

TEST_CASE("flux derivatives agree with centred differences of the flux") {
  for (const FluxSpec& f : {burgers_flux(), bounded_flux(), linear_flux(2.0)}) {
    for (double u : {-1.3, -0.2, 0.0, 0.7, 2.1}) {
      const double h = 1e-5;
      const double fd = (f.eval(u + h)[0] - f.eval(u - h)[0]) / (2 * h);
      CHECK(f.deriv(u)[0] == doctest::Approx(fd).epsilon(1e-8));
    }
  }
}

TEST_CASE("tabulated flux reproduces a cubic and extrapolates linearly") {
  std::vector<double> u, f, fp;
  for (int i = 0; i <= 8; ++i) {
    const double x = -1.0 + 0.25 * i;
    u.push_back(x);
    f.push_back(x * x * x);
    fp.push_back(3 * x * x);
  }
  const FluxSpec t = tabulated_flux(u, f, fp);
  for (double x = -1.0; x <= 1.0; x += 0.0625) CHECK(t.eval(x)[0] == doctest::Approx(x * x * x).epsilon(1e-12));
  // Beyond the table: f(1) + f'(1) (x - 1).
  CHECK(t.eval(1.5)[0] == doctest::Approx(1.0 + 3.0 * 0.5));
  CHECK_THROWS_AS(tabulated_flux({0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("flux presets") {
  CHECK(flux_preset("burgers").name == "burgers");
  CHECK(flux_preset("linear", 1, 3.0).eval(1.0)[0] == 3.0);
  CHECK_THROWS_AS(flux_preset("nope"), std::invalid_argument);
  CHECK_THROWS_AS(flux_preset("csv:/no/such/file.csv"), std::invalid_argument);
}

TEST_CASE("growth hypothesis on Burgers and a violating flux") {
  const auto rep = check_growth_H1(burgers_flux(), {-5.0, 5.0}, 101);
  CHECK(rep.holds);
  FluxSpec wild = burgers_flux();
  wild.deriv = [](double u) { return Vec{u * u * u, 0.0}; };
  const auto bad = check_growth_H1(wild, {-5.0, 5.0}, 101);
  CHECK_FALSE(bad.holds);
  CHECK(std::abs(bad.witness) > 1.0);
}

TEST_CASE("power diffusion is two-sided coercive with C2 = C3 = 1") {
  const DiffusionSpec d = power_diffusion(2.5, 2);
  std::vector<Vec> samples;
  for (double a = -2.0; a <= 2.0; a += 0.25)
    for (double b = -2.0; b <= 2.0; b += 0.5) samples.push_back({a, b});
  const auto rep = check_coercivity_H2(d, samples);
  CHECK(rep.holds);
  CHECK(rep.worst_lower == doctest::Approx(1.0));
  CHECK(rep.worst_upper == doctest::Approx(1.0));

  DiffusionSpec anti = linear_diffusion();
  anti.eval = [](const Vec& l) { return Vec{-l[0], 0.0}; };
  const std::vector<Vec> one{{1.0, 0.0}};
  const auto bad = check_coercivity_H2(anti, one);
  CHECK_FALSE(bad.holds);
  CHECK(bad.anti_dissipative);
  CHECK_THROWS_AS(power_diffusion(0.5), std::invalid_argument);
}

TEST_CASE("uniform ellipticity holds for linear diffusion, fails for degenerate power law") {
  const std::vector<Vec> lam{{0.0, 0.0}, {1.0, -2.0}, {0.3, 0.1}};
  const std::vector<Vec> probes{{1.0, 0.0}, {0.0, 1.0}, {std::sqrt(0.5), std::sqrt(0.5)}};
  const auto lin = check_H3(linear_diffusion(2), lam, probes);
  CHECK(lin.holds);
  CHECK(lin.min_eigen_proxy == doctest::Approx(1.0));
  DiffusionSpec p = power_diffusion(2.0, 2);
  p.h3_constant = 0.1;
  CHECK_FALSE(check_H3(p, lam, probes).holds);  // Db(0) = 0
}

TEST_CASE("quadratic entropy flux for Burgers is u^3 / 3") {
  const EntropyPair pair = make_entropy_pair(quadratic_entropy(), burgers_flux(), {-2.0, 3.0});
  for (double u : {-2.0, -1.1, 0.0, 0.4, 1.7, 3.0}) CHECK(pair.q(u)[0] == doctest::Approx(u * u * u / 3.0).epsilon(1e-10));
  CHECK(pair.q(0.0)[0] == 0.0);
}

TEST_CASE("power entropy flux satisfies q' = eta' f'") {
  const EntropyPair pair = make_entropy_pair(power_entropy(2.0), burgers_flux(), {-1.0, 1.0});
  for (double u : {-0.8, -0.1, 0.3, 0.9}) {
    const double h = 1e-5;
    const double dq = (pair.q(u + h)[0] - pair.q(u - h)[0]) / (2 * h);
    CHECK(dq == doctest::Approx(pair.eta_prime(u) * u).epsilon(1e-6));
  }
  CHECK(pair.eta_third(0.5) == doctest::Approx(2.0));
}

TEST_CASE("Kruzkov entropy is convex and close to |u - k|") {
  const EntropyFunction k = kruzkov_entropy(0.5, 1e-3);
  CHECK(k.eta(0.5) == 0.0);
  CHECK(k.eta(1.5) == doctest::Approx(1.0).epsilon(1e-3));
  for (double u : {-1.0, 0.49, 0.5, 0.6, 2.0}) CHECK(k.eta_second(u) > 0.0);
  CHECK_THROWS_AS(kruzkov_entropy(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("non-convex entropies are rejected with a witness") {
  EntropyFunction bad = quadratic_entropy();
  bad.eta = [](double u) { return -0.5 * u * u; };
  bad.eta_prime = [](double u) { return -u; };
  bad.eta_second = [](double) { return -1.0; };
  try {
    (void)make_entropy_pair(bad, burgers_flux(), {-1.0, 1.0});
    FAIL("expected NonConvexEntropy");
  } catch (const NonConvexEntropy& e) {
    CHECK(e.witness() >= -1.0);
    CHECK(e.witness() <= 1.0);
  }
}

TEST_CASE("convexity of fluxes") {
  CHECK(flux_is_convex(burgers_flux(), {-1.0, 1.0}));
  FluxSpec concave = burgers_flux();
  concave.deriv = [](double u) { return Vec{-u, 0.0}; };
  CHECK_FALSE(flux_is_convex(concave, {-1.0, 1.0}));
}
