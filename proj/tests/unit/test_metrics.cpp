#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "episcale/core/initial_distribution.hpp"
#include "episcale/core/random.hpp"
#include "episcale/metrics/commutator.hpp"
#include "episcale/metrics/measures.hpp"
#include "episcale/metrics/slope_fit.hpp"
#include "episcale/metrics/transport.hpp"
#include "support/oracles.hpp"

using namespace episcale;

namespace {

std::vector<Point> random_points(Rng& rng, std::size_t n) {
  std::vector<Point> x(n);
  for (auto& p : x) p = {uniform01(rng), uniform01(rng)};
  return x;
}

AtomSet uniform_atoms(const std::vector<Point>& x) {
  AtomSet a;
  for (Point p : x) a.add(p, 1.0 / static_cast<double>(x.size()));
  return a;
}

AtomSet random_atoms(Rng& rng, std::size_t n, double mass) {
  AtomSet a;
  double total = 0.0;
  std::vector<double> w(n);
  for (double& v : w) total += (v = 0.1 + uniform01(rng));
  for (std::size_t k = 0; k < n; ++k) a.add({uniform01(rng), uniform01(rng)}, w[k] * mass / total);
  return a;
}

}  // namespace

TEST_CASE("W1 identities", "[w1]") {
  Rng rng(1);
  const AtomSet a = random_atoms(rng, 30, 1.0);
  CHECK(w1_exact(a, a) == Catch::Approx(0.0).margin(1e-14));
  AtomSet dx, dy;
  dx.add({0.1, 0.2}, 0.5);
  dy.add({0.4, 0.6}, 0.5);
  CHECK(w1_exact(dx, dy) == Catch::Approx(0.25).epsilon(1e-14));
  // Translating every atom moves W1 by exactly the shift.
  AtomSet shifted = a;
  for (Point& p : shifted.positions) p = {p.x + 0.01, p.y - 0.02};
  CHECK(w1_exact(a, shifted) == Catch::Approx(std::hypot(0.01, 0.02)).epsilon(1e-12));
  CHECK_THROWS(w1_exact(dx, a));
}

TEST_CASE("W1 equals the permutation optimum for uniform atoms", "[w1]") {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto xa = random_points(rng, 5), xb = random_points(rng, 5);
    REQUIRE(std::abs(w1_exact(uniform_atoms(xa), uniform_atoms(xb)) - oracle::permutation_w1(xa, xb)) <= 1e-10);
  }
}

TEST_CASE("W1 equals the transport LP for general weights", "[w1]") {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const AtomSet a = random_atoms(rng, 4 + t % 5, 0.7), b = random_atoms(rng, 3 + t % 4, 0.7);
    const double lp = oracle::lp_w1(a.positions, a.weights, b.positions, b.weights);
    REQUIRE(w1_exact(a, b) == Catch::Approx(lp).epsilon(1e-9).margin(1e-12));
  }
}

TEST_CASE("bounded-Lipschitz distance", "[bl]") {
  Rng rng(4);
  const AtomSet a = random_atoms(rng, 20, 0.6);
  CHECK(bounded_lipschitz(a, a) == Catch::Approx(0.0).margin(1e-14));
  AtomSet dirac, empty;
  dirac.add({0.3, 0.3}, 1.0);
  CHECK(bounded_lipschitz(dirac, empty) == Catch::Approx(1.0).epsilon(1e-14));
  for (int t = 0; t < 50; ++t) {
    const AtomSet x = random_atoms(rng, 6, 0.5), y = random_atoms(rng, 7, 0.5);
    REQUIRE(bounded_lipschitz(x, y) <= w1_exact(x, y) + 1e-12);
  }
  for (int t = 0; t < 30; ++t) {
    const AtomSet x = random_atoms(rng, 3 + t % 4, 0.3 + 0.02 * t), y = random_atoms(rng, 4 + t % 3, 0.8);
    const double lp = oracle::lp_bounded_lipschitz(x.positions, x.weights, y.positions, y.weights);
    REQUIRE(bounded_lipschitz(x, y) == Catch::Approx(lp).epsilon(1e-9).margin(1e-12));
  }
}

TEST_CASE("metric axioms", "[w1][bl]") {
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const AtomSet a = random_atoms(rng, 4, 1.0), b = random_atoms(rng, 5, 1.0), c = random_atoms(rng, 3, 1.0);
    const double ab = w1_exact(a, b), ba = w1_exact(b, a), bc = w1_exact(b, c), ac = w1_exact(a, c);
    REQUIRE(ab >= 0.0);
    REQUIRE(std::abs(ab - ba) <= 1e-12);
    REQUIRE(ac <= ab + bc + 1e-12);
  }
  for (int t = 0; t < 200; ++t) {
    const AtomSet a = random_atoms(rng, 4, 0.4), b = random_atoms(rng, 5, 0.9), c = random_atoms(rng, 3, 0.6);
    REQUIRE(std::abs(bounded_lipschitz(a, b) - bounded_lipschitz(b, a)) <= 1e-12);
    REQUIRE(bounded_lipschitz(a, c) <= bounded_lipschitz(a, b) + bounded_lipschitz(b, c) + 1e-12);
  }
}

TEST_CASE("aggregation error bound holds", "[aggregate]") {
  Rng rng(6);
  const AtomSet a = random_atoms(rng, 3000, 1.0), b = random_atoms(rng, 3000, 1.0);
  const AtomSet small = random_atoms(rng, 1000, 1.0);
  for (std::size_t g : {8u, 16u, 32u}) {
    const AtomSet ag = aggregate(small, g);
    CHECK(ag.mass() == Catch::Approx(1.0).epsilon(1e-12));
    // No unit of mass moves farther than half a cell diagonal.
    CHECK(w1_exact(small, rescaled(ag, small.mass())) <= 1.0 / (static_cast<double>(g) * std::numbers::sqrt2) + 1e-12);
  }
  const auto est = with_aggregation(a, b, [](const AtomSet& x, const AtomSet& y) {
    return w1_exact(x, rescaled(y, x.mass()));
  }, 32);
  CHECK(est.grid == 32);
  CHECK(est.aggregation_error == Catch::Approx(2.0 / (32.0 * std::numbers::sqrt2)));
  // Small problems are solved exactly with no aggregation error.
  const AtomSet s1 = random_atoms(rng, 40, 1.0), s2 = random_atoms(rng, 40, 1.0);
  const auto exact = with_aggregation(s1, s2, [](const AtomSet& x, const AtomSet& y) { return w1_exact(x, y); });
  CHECK(exact.aggregation_error == 0.0);
  const auto forced = with_aggregation(s1, s2, [](const AtomSet& x, const AtomSet& y) {
    return w1_exact(x, rescaled(y, x.mass()));
  }, 16, true);
  CHECK(std::abs(forced.value - exact.value) <= forced.aggregation_error + 1e-12);
}

TEST_CASE("w1 triple combines components", "[w1]") {
  Rng rng(7);
  std::array<AtomSet, 3> a{random_atoms(rng, 10, 0.5), random_atoms(rng, 10, 0.3), random_atoms(rng, 10, 0.2)};
  std::array<AtomSet, 3> b = a;
  for (auto& part : b)
    for (Point& p : part.positions) p.x += 0.05;
  CHECK(w1_triple(a, b).value == Catch::Approx(0.05).epsilon(1e-10));
  b[1] = random_atoms(rng, 10, 0.1);  // unequal mass: bounded-Lipschitz for that part
  const auto d = w1_triple(a, b);
  CHECK(d.value == Catch::Approx(0.05 * 0.7 + bounded_lipschitz(a[1], b[1])).epsilon(1e-10));
}

TEST_CASE("empirical measure masses", "[measures]") {
  CompartmentProfile c;
  c.infected_base = 0.3;
  c.removed_fraction = 0.1;
  const auto pop = sample_initial_population(InitialDistribution(SpatialDensity(), c), 1000, 9);
  const auto mu = empirical_measure(pop);
  CHECK(mu.total_mass() == Catch::Approx(1.0).epsilon(1e-14));
  for (HealthState a : kHealthStates) {
    CHECK(mu[a].mass() == Catch::Approx(static_cast<double>(pop.count(a)) / 1000.0).epsilon(1e-13));
  }
}

TEST_CASE("mollified density of a single atom", "[measures]") {
  const std::size_t n = 10000;
  const LocalKernel k(0.25, n);
  EmpiricalMeasure mu;
  mu.n = n;
  mu[HealthState::I].add({0.5, 0.5}, 1.0 / static_cast<double>(n));
  const GridField rho = mollified_density(mu, k, 64);
  double peak = 0.0;
  for (std::size_t c = 0; c < rho.cells(); ++c) peak = std::max(peak, rho.at(HealthState::I, c));
  const double theta0 = std::pow(static_cast<double>(n), 0.25) * std::exp(-1.0) / oracle::bump_mass();
  CHECK(peak <= theta0 / static_cast<double>(n) * (1.0 + 1e-12));
  CHECK(peak >= 0.99 * theta0 / static_cast<double>(n));
  std::string warning;
  mollified_density(mu, LocalKernel(0.25, 16), 2, &warning);
  CHECK_FALSE(warning.empty());
}

TEST_CASE("mollified compartments are dominated by the total", "[measures]") {
  CompartmentProfile c;
  c.infected_base = 0.3;
  c.removed_fraction = 0.2;
  const auto pop = sample_initial_population(InitialDistribution(SpatialDensity(), c), 3000, 11);
  const GridField rho = mollified_density(empirical_measure(pop), LocalKernel(0.25, 3000), 32);
  const auto total = mollified_total(rho);
  for (std::size_t cell = 0; cell < rho.cells(); ++cell) {
    for (HealthState a : kHealthStates) REQUIRE(rho.at(a, cell) <= total[cell] + 1e-15);
  }
}

TEST_CASE("mollification distance stays below the support radius", "[measures]") {
  CompartmentProfile c;
  c.infected_base = 0.2;
  for (std::size_t n : {500u, 5000u}) {
    const auto pop = sample_initial_population(InitialDistribution(SpatialDensity(), c), n, 12);
    const LocalKernel k(0.25, n);
    const auto d = mollification_distance(empirical_measure(pop), k, 24);
    CHECK(d.value > 0.0);
    CHECK(d.value <= k.support_radius() * (1.0 + 1e-9));
  }
}

TEST_CASE("commutator", "[commutator]") {
  CompartmentProfile none;
  none.infected_base = 1.0;
  const auto all_infected = sample_initial_population(InitialDistribution(SpatialDensity(), none), 400, 13);
  const LocalKernel k(0.25, 400);
  CHECK(commutator_field(all_infected.positions, all_infected.states, k, 16).sup_norm() == 0.0);

  CompartmentProfile mixed;
  mixed.infected_base = 0.4;
  const auto pop = sample_initial_population(InitialDistribution(SpatialDensity(), mixed), 2000, 14);
  const LocalKernel k2(0.25, 2000);
  const auto field = commutator_field(pop.positions, pop.states, k2, 32);
  const double theta_sup = std::pow(2000.0, 0.25) * std::exp(-1.0) / oracle::bump_mass();
  CHECK(std::isfinite(field.sup_norm()));
  // Each term is bounded by the square of the mollified total density.
  CHECK(field.sup_norm() <= theta_sup * theta_sup);
}

TEST_CASE("log-log slope fit", "[slope]") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {100.0, 400.0, 1600.0, 6400.0}) pts.push_back({n, 3.0 * std::pow(n, -0.5)});
  const auto fit = slope_fit(pts);
  CHECK(std::abs(fit.slope + 0.5) <= 1e-12);
  CHECK(fit.stderr_slope <= 1e-12);
  for (auto& p : pts) p.second = 2.0;
  CHECK(std::abs(slope_fit(pts).slope) <= 1e-15);
  CHECK_THROWS(slope_fit({{1.0, 1.0}, {2.0, 2.0}}));
  CHECK_THROWS(slope_fit({{1.0, 1.0}, {2.0, 0.0}, {3.0, 1.0}}));
  CHECK_THROWS(slope_fit({{1.0, 1.0}, {-2.0, 1.0}, {3.0, 1.0}}));
}
