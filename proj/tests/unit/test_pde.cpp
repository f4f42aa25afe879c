#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "zrp/errors.hpp"
#include "zrp/pde.hpp"

using namespace zrp;

namespace {

Thermodynamics make(OneSpeciesRate base) { return Thermodynamics(species_blind_rate(base)); }

PdeOptions grid(Count M) {
  PdeOptions options;
  options.M = M;
  return options;
}

}  // namespace

TEST_CASE("constant data stays constant") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  const PdeField initial = PdeField::from_profile(Profile::constant({0.1, 0.2}), 32);
  const std::vector<double> times{0.01, 0.05};
  const SystemSolution solution = solve_system(thermo, initial, times, grid(32));
  REQUIRE(solution.trajectory.size() == 2);
  for (const PdeField& field : solution.trajectory) {
    for (std::size_t i = 0; i < field.points(); ++i) {
      CHECK(field.rho1[i] == doctest::Approx(0.1).epsilon(1e-13));
      CHECK(field.rho2[i] == doctest::Approx(0.2).epsilon(1e-13));
    }
  }
  CHECK(solution.trajectory.back().t == doctest::Approx(0.05));
  CHECK_FALSE(solution.report.breach);
}

TEST_CASE("a vanishing species stays zero and mass is conserved") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  const Profile profile(ProfileComponent::parse("0.2 + 0.1*cos(2*pi*u)"),
                        ProfileComponent::parse("0"));
  const PdeField initial = PdeField::from_profile(profile, 64);
  const std::vector<double> times{0.02};
  const SystemSolution solution = solve_system(thermo, initial, times, grid(64));
  const PdeField& last = solution.trajectory.back();
  for (double v : last.rho2) CHECK(v == 0.0);
  CHECK(last.mass(0) == doctest::Approx(initial.mass(0)).epsilon(1e-12));
  CHECK_FALSE(solution.report.breach);
}

TEST_CASE("system and decoupled routes agree") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  const Profile profile(ProfileComponent::parse("0.2 + 0.025*cos(2*pi*u)"),
                        ProfileComponent::parse("0.2 + 0.025*sin(2*pi*u)"));
  const PdeField initial = PdeField::from_profile(profile, 64);
  const std::vector<double> times{0.01};
  const auto a = solve_system(thermo, initial, times, grid(64));
  const auto b = solve_species_blind_decoupled(*thermo.species_blind(), initial, times, grid(64));
  double diff = 0.0;
  for (std::size_t i = 0; i < initial.points(); ++i) {
    diff = std::max(diff, std::abs(a.trajectory[0].rho1[i] - b.trajectory[0].rho1[i]));
    diff = std::max(diff, std::abs(a.trajectory[0].rho2[i] - b.trajectory[0].rho2[i]));
  }
  CHECK(diff < 1e-4);
}

TEST_CASE("heat equation envelope for the linear rate") {
  const Thermodynamics thermo = make(OneSpeciesRate::linear());
  const Profile profile(ProfileComponent::parse("0.5 + 0.2*cos(2*pi*u)"),
                        ProfileComponent::parse("0.5"));
  const Count M = 128;
  const PdeField initial = PdeField::from_profile(profile, M);
  const double t = 0.02;
  const std::vector<double> times{t};
  const auto solution = solve_system(thermo, initial, times, grid(M));
  const double decay = std::exp(-4.0 * std::numbers::pi * std::numbers::pi * t);
  double err = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const double u = static_cast<double>(i) / M;
    const double exact = 0.5 + 0.2 * decay * std::cos(2.0 * std::numbers::pi * u);
    err = std::max(err, std::abs(solution.trajectory[0].rho1[i] - exact));
  }
  CHECK(err < 1e-4);
  // Maximum principle: the solution stays inside the initial envelope.
  CHECK(solution.report.min_rho1 >= solution.report.initial_min_rho1 - 1e-12);
  CHECK(solution.report.max_sum <= solution.report.initial_max_sum + 1e-12);
}

TEST_CASE("the monitor flags injected NaN and supercritical values") {
  PdeField field = PdeField::from_profile(Profile::constant({0.1, 0.1}), 8);
  std::vector<PdeField> trajectory{field, field};
  trajectory[1].t = 0.5;
  trajectory[1].rho1[3] = std::numeric_limits<double>::quiet_NaN();
  const auto report = invariant_region_monitor(trajectory, 0.5);
  CHECK(report.breach);
  CHECK(report.breach_index == 3);
  CHECK(report.breach_time == doctest::Approx(0.5));

  trajectory[1].rho1[3] = 0.45;
  CHECK(invariant_region_monitor(trajectory, 0.5).breach);
  trajectory[1].rho1[3] = 0.2;
  CHECK_FALSE(invariant_region_monitor(trajectory, 0.5).breach);
}

TEST_CASE("supercritical initial data is rejected") {
  const Thermodynamics thermo = make(OneSpeciesRate::evans(4));
  const PdeField initial = PdeField::from_profile(Profile::constant({0.3, 0.3}), 16);
  const std::vector<double> times{0.01};
  CHECK_THROWS_AS(solve_system(thermo, initial, times, grid(16)), CriticalityError);
}

TEST_CASE("an empty time grid is a domain error") {
  const Thermodynamics thermo = make(OneSpeciesRate::linear());
  const PdeField initial = PdeField::from_profile(Profile::constant({0.1, 0.1}), 16);
  CHECK_THROWS_AS(solve_system(thermo, initial, {}, grid(16)), DomainError);
}

TEST_CASE("mean jump rate table matches the one-species inverse") {
  const OneSpeciesThermo base(OneSpeciesRate::evans(4));
  const MeanJumpRateTable table(base, base.critical_density());
  CHECK(table.condensing());
  for (double s : {0.01, 0.1, 0.3, 0.45}) {
    CHECK(table.value(s) == doctest::Approx(base.mean_jump_rate(s)).epsilon(1e-8));
    CHECK(table.coefficient(s) == doctest::Approx(table.value(s) / s));
  }
}

TEST_CASE("periodic interpolation") {
  const std::vector<double> values{0.0, 1.0, 2.0, 3.0};
  CHECK(interpolate_periodic(values, 0.125) == doctest::Approx(0.5));
  CHECK(interpolate_periodic(values, 0.875) == doctest::Approx(1.5));
}
