#include <cmath>
#include <numbers>

#include "doctest.h"
#include "zrp/errors.hpp"
#include "zrp/verify.hpp"

using namespace zrp;

namespace {

struct Fixture {
  Thermodynamics thermo{species_blind_rate(OneSpeciesRate::evans(4))};
  Profile profile{ProfileComponent::parse("0.2 + 0.025*cos(2*pi*u)"),
                  ProfileComponent::parse("0.1")};
  Count side = 64;
  std::vector<TrajectoryRecord> records;

  Fixture() {
    RunOptions options;
    options.side = side;
    options.snapshot_times = {0.0, 0.002};
    options.seed = 123;
    options.replicas = 16;
    auto product = std::make_shared<SlowlyVaryingProduct>(thermo, profile, side);
    records = run(thermo.rate(), [product](std::uint64_t s, std::uint64_t r) {
      return product->sample(s, r);
    }, options);
  }
};

}  // namespace

TEST_CASE("one-block statistic of F = 0 vanishes") {
  Fixture fx;
  const std::vector<double> times{0.0, 0.002};
  const auto stat = one_block_statistic(fx.thermo, fx.records,
                                        [](double, double) { return Vec2::Zero().eval(); }, 2,
                                        times);
  CHECK(stat.value == 0.0);
  CHECK(stat.per_replica.size() == fx.records.size());
  const std::vector<double> missing{0.001};
  CHECK_THROWS_AS(one_block_statistic(fx.thermo, fx.records,
                                      [](double, double) { return Vec2::Ones().eval(); }, 2,
                                      missing),
                  DomainError);
}

TEST_CASE("local equilibrium test with H = 0 vanishes") {
  Fixture fx;
  std::vector<std::vector<Counts>> configs;
  for (const auto& r : fx.records) configs.push_back(r.snapshots[0].eta);
  const CylinderFunction f{{0}, [](std::span<const Counts> k) { return double(k[0][0]); }};
  const auto stat = local_equilibrium_test(fx.thermo, Torus(fx.side, 1), configs,
                                           [&](double u) { return fx.profile(u); }, f,
                                           [](double) { return 0.0; });
  CHECK(stat.value == 0.0);
}

TEST_CASE("local equilibrium holds at t = 0 within four standard errors") {
  Fixture fx;
  std::vector<std::vector<Counts>> configs;
  for (const auto& r : fx.records) configs.push_back(r.snapshots[0].eta);
  const CylinderFunction f{{0, 1}, [](std::span<const Counts> k) {
                             return (k[0][0] > 0 ? 1.0 : 0.0) * (k[1][1] > 0 ? 1.0 : 0.0);
                           }};
  const auto stat = local_equilibrium_test(
      fx.thermo, Torus(fx.side, 1), configs, [&](double u) { return fx.profile(u); }, f,
      [](double u) { return 1.0 + std::cos(2.0 * std::numbers::pi * u); });
  CHECK(stat.value <= 4.0 * stat.standard_error + 1e-12);
}

TEST_CASE("the one-block statistic is symmetric under species swap") {
  Fixture fx;
  std::vector<TrajectoryRecord> swapped = fx.records;
  for (auto& r : swapped) {
    std::swap(r.totals.k1, r.totals.k2);
    for (auto& s : r.snapshots) {
      for (auto& k : s.eta) std::swap(k.k1, k.k2);
    }
  }
  const TestField F = [](double, double u) {
    return Vec2(1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * u), 0.3);
  };
  const TestField G = [&](double t, double u) {
    const Vec2 v = F(t, u);
    return Vec2(v[1], v[0]);
  };
  const std::vector<double> times{0.0, 0.002};
  const auto a = one_block_statistic(fx.thermo, fx.records, F, 3, times);
  const auto b = one_block_statistic(fx.thermo, swapped, G, 3, times);
  CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));
}

TEST_CASE("default block size") {
  CHECK(default_block_size(64) == 8);
  CHECK(default_block_size(100) == 10);
  CHECK(default_block_size(99) == 9);
}
