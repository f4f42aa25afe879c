#include <cmath>
#include <filesystem>
#include <memory>
#include <random>

#include "doctest.h"
#include "zrp/ensembles.hpp"
#include "zrp/errors.hpp"

using namespace zrp;

namespace {

Thermodynamics make(OneSpeciesRate base) { return Thermodynamics(species_blind_rate(base)); }

}  // namespace

TEST_CASE("state space enumeration round trip") {
  const StateSpace space(3, 1, {2, 1});
  CHECK(space.size() == 6 * 3);
  CHECK(StateSpace::count(3, 1, {2, 1}) == 18);
  std::vector<Counts> eta;
  for (std::size_t i = 0; i < space.size(); ++i) {
    space.decode(i, eta);
    Counts sum{0, 0};
    for (const Counts& k : eta) {
      sum.k1 += k.k1;
      sum.k2 += k.k2;
    }
    CHECK(sum == Counts{2, 1});
    CHECK(space.encode(eta) == i);
  }
  CHECK_THROWS_AS(StateSpace(20, 1, {20, 20}, 1000), FeasibilityError);
}

TEST_CASE("canonical measure of the linear rate with N=2, K=(1,1) is uniform") {
  const Thermodynamics thermo = make(OneSpeciesRate::linear());
  const DistributionTable nu = canonical_measure(thermo, 2, 1, {1, 1});
  REQUIRE(nu.probabilities.size() == 4);
  for (double p : nu.probabilities) CHECK(p == doctest::Approx(0.25));
}

TEST_CASE("relative entropy of two-point laws") {
  // H(Bern(1/2) | Bern(1/4)) on a two-element state space.
  auto space = std::make_shared<const StateSpace>(2, 1, Counts{1, 0});
  REQUIRE(space->size() == 2);
  const DistributionTable mu{space, {0.5, 0.5}};
  const DistributionTable nu{space, {0.75, 0.25}};
  CHECK(relative_entropy(mu, nu) == doctest::Approx(0.143841).epsilon(1e-5));
  CHECK(relative_entropy(mu, mu) == doctest::Approx(0.0));
  const DistributionTable point{space, {1.0, 0.0}};
  CHECK(std::isinf(relative_entropy(mu, point)));
  CHECK(mu.total_variation(nu) == doctest::Approx(0.25));
}

TEST_CASE("canonical measure is stationary") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  const DistributionTable nu = canonical_measure(thermo, 4, 1, {2, 3});
  const Generator generator(thermo.rate(), nu.space);
  CHECK(stationarity_residual(generator, nu) < 1e-12);
}

TEST_CASE("exact canonical-vs-product entropy matches the enumerated sum") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  const DistributionTable nu = canonical_measure(thermo, 3, 1, {2, 2});
  const Vec2 phi{0.2, 0.2};
  const double closed = canonical_vs_product_entropy(thermo, *nu.space, phi);
  const GrandCanonicalPoint point = thermo.partition_function(phi);
  double direct = 0.0;
  std::vector<Counts> eta;
  for (std::size_t i = 0; i < nu.space->size(); ++i) {
    nu.space->decode(i, eta);
    double log_product = -3.0 * point.log_z;
    for (const Counts& k : eta) {
      log_product += k[0] * std::log(phi[0]) + k[1] * std::log(phi[1]) -
                     thermo.log_g_factorial(k);
    }
    const double p = nu.probabilities[i];
    if (p > 0.0) direct += p * (std::log(p) - log_product);
  }
  CHECK(closed == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("master equation conserves probability and relaxes") {
  const Thermodynamics thermo = make(OneSpeciesRate::linear());
  const DistributionTable nu = canonical_measure(thermo, 3, 1, {2, 1});
  const Generator generator(thermo.rate(), nu.space);
  DistributionTable delta{nu.space, std::vector<double>(nu.space->size(), 0.0)};
  delta.probabilities[0] = 1.0;
  const DistributionTable later = master_equation_evolve(generator, delta, 50.0);
  double total = 0.0;
  for (double p : later.probabilities) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(later.total_variation(nu) < 1e-6);
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
  const auto trace = entropy_production_trace(generator, delta, nu, times);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);
}

TEST_CASE("particle numbers follow the K-rule") {
  CHECK(particle_numbers({0.5, 0.0}, 4, 1) == Counts{2, 0});
  CHECK(particle_numbers({0.01, 0.3}, 4, 1) == Counts{1, 1});
  CHECK(particle_numbers({0.25, 0.25}, 4, 2) == Counts{4, 4});
}

TEST_CASE("one-site marginal matches the grand-canonical density") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  const Vec2 rho{0.1, 0.2};
  const OneSiteMarginal marginal = OneSiteMarginal::from_density(thermo, rho);
  CHECK(marginal.expectation([](Counts k) { return double(k[0]); }) ==
        doctest::Approx(rho[0]).epsilon(1e-9));
  CHECK(marginal.expectation([](Counts k) { return double(k[1]); }) ==
        doctest::Approx(rho[1]).epsilon(1e-9));
  std::mt19937_64 rng(5);
  double sum = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) sum += marginal.sample(rng)[1];
  CHECK(sum / draws == doctest::Approx(rho[1]).epsilon(0.03));
}

TEST_CASE("distribution table JSON round trip") {
  const Thermodynamics thermo = make(OneSpeciesRate::linear());
  const DistributionTable nu = canonical_measure(thermo, 3, 1, {1, 2});
  const auto path = std::filesystem::temp_directory_path() / "zrp_unit_law.json";
  nu.save(path);
  const DistributionTable back = DistributionTable::load(path);
  CHECK(*back.space == *nu.space);
  CHECK(back.total_variation(nu) < 1e-15);
  CHECK_THROWS_AS(DistributionTable::load(path.string() + ".missing"), IoError);
}
