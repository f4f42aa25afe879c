#include <cmath>

#include "doctest.h"
#include "zrp/errors.hpp"
#include "zrp/rates.hpp"
#include "zrp/thermo.hpp"

using namespace zrp;

namespace {

Thermodynamics make(OneSpeciesRate base, bool closed_forms = true) {
  Thermodynamics::Options options;
  options.closed_forms = closed_forms;
  return Thermodynamics(species_blind_rate(std::move(base)), options);
}

}  // namespace

TEST_CASE("mean jump rate of the constant rate") {
  const Thermodynamics thermo = make(OneSpeciesRate::constant());
  const Vec2 phi = thermo.mean_jump_rate({1.0, 1.0});
  CHECK(phi[0] == doctest::Approx(1.0 / 3.0));
  CHECK(phi[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("linear rate: Poisson entropy and rate function") {
  const Thermodynamics thermo = make(OneSpeciesRate::linear());
  CHECK(thermo.entropy({1.0, 1.0}) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(thermo.rate_function({1.0, 1.0}, {2.0, 1.0}) ==
        doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-9));
  CHECK(thermo.rate_function({1.0, 1.0}, {1.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-9));
  const Vec2 phi = thermo.mean_jump_rate({0.7, 1.3});
  CHECK(phi[0] == doctest::Approx(0.7));
  CHECK(phi[1] == doctest::Approx(1.3));
}

TEST_CASE("evans rate: extended mean jump rate and condensed density") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  CHECK_FALSE(thermo.is_subcritical({0.6, 0.6}));
  CHECK(thermo.is_subcritical({0.2, 0.2}));
  const Vec2 phibar = thermo.extended_mean_jump_rate({0.6, 0.6});
  CHECK(phibar[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(phibar[1] == doctest::Approx(0.5).epsilon(1e-8));
  const Vec2 rc = thermo.condensed_density({0.6, 0.6});
  CHECK(rc[0] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(rc[1] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK_THROWS_AS(thermo.mean_jump_rate({0.6, 0.6}), CriticalityError);
}

TEST_CASE("R and Phi are inverse to each other") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  const Vec2 rho{0.1, 0.15};
  const Vec2 phi = thermo.mean_jump_rate(rho);
  const GrandCanonicalPoint point = thermo.partition_function(phi);
  CHECK(point.density[0] == doctest::Approx(rho[0]).epsilon(1e-9));
  CHECK(point.density[1] == doctest::Approx(rho[1]).epsilon(1e-9));
}

TEST_CASE("closed forms agree with the double series") {
  const Thermodynamics closed = make(OneSpeciesRate::evans(4), true);
  const Thermodynamics series = make(OneSpeciesRate::evans(4), false);
  const Vec2 phi{0.2, 0.15};
  const auto a = closed.partition_function(phi);
  const auto b = series.partition_function(phi);
  CHECK(a.log_z == doctest::Approx(b.log_z).epsilon(1e-10));
  CHECK(a.density[0] == doctest::Approx(b.density[0]).epsilon(1e-9));
  CHECK(species_blind_z_identity_residual(OneSpeciesRate::evans(4), phi) < 1e-10);
}

TEST_CASE("species swap symmetry of species-blind rates") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  const Vec2 a = thermo.mean_jump_rate({0.05, 0.2});
  const Vec2 b = thermo.mean_jump_rate({0.2, 0.05});
  CHECK(a[0] == doctest::Approx(b[1]));
  CHECK(a[1] == doctest::Approx(b[0]));
  CHECK(thermo.entropy({0.05, 0.2}) == doctest::Approx(thermo.entropy({0.2, 0.05})));
}

TEST_CASE("quasi-potential vanishes at lambda = rho") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  const Vec2 psi = thermo.quasi_potential({0.1, 0.1}, {0.1, 0.1});
  CHECK(std::abs(psi[0]) < 1e-8);
  CHECK(std::abs(psi[1]) < 1e-8);
}

TEST_CASE("partition function outside the domain diverges") {
  const Thermodynamics thermo = make(OneSpeciesRate::constant());
  CHECK_THROWS_AS(thermo.partition_function({0.6, 0.6}), DivergenceError);
}
