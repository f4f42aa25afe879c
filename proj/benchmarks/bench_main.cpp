// Throughput of the hot paths: KMC steps, thermodynamic inversions, PDE steps
// and exact master-equation propagation.
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "zrp/ensembles.hpp"
#include "zrp/pde.hpp"
#include "zrp/simulate.hpp"
#include "zrp/thermo.hpp"

namespace {

using namespace zrp;

const Thermodynamics& evans_thermo() {
  static const Thermodynamics thermo(species_blind_rate(OneSpeciesRate::evans(4)));
  return thermo;
}

void BM_KineticMonteCarloStep(benchmark::State& state) {
  const Thermodynamics& thermo = evans_thermo();
  const Count side = static_cast<Count>(state.range(0));
  const SlowlyVaryingProduct product(thermo, Profile::constant({0.2, 0.2}), side);
  KineticMonteCarlo kmc(thermo.rate(), LatticeConfiguration(Torus(side, 1), product.sample(1, 0)));
  std::mt19937_64 rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(kmc.step(rng));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_KineticMonteCarloStep)->Arg(256)->Arg(4096);

void BM_MeanJumpRateClosedForm(benchmark::State& state) {
  const Thermodynamics& thermo = evans_thermo();
  double s = 0.0;
  for (auto _ : state) {
    s = s > 0.4 ? 0.01 : s + 0.001;
    benchmark::DoNotOptimize(thermo.mean_jump_rate({s, 0.05}));
  }
}
BENCHMARK(BM_MeanJumpRateClosedForm);

void BM_SolveSystem(benchmark::State& state) {
  const Thermodynamics& thermo = evans_thermo();
  const Profile profile(ProfileComponent::parse("0.2 + 0.025*cos(2*pi*u)"),
                        ProfileComponent::parse("0.2 + 0.025*sin(2*pi*u)"));
  PdeOptions options;
  options.M = static_cast<Count>(state.range(0));
  const PdeField initial = PdeField::from_profile(profile, options.M);
  const std::vector<double> times{0.001};
  for (auto _ : state) {
    const SystemSolution solution = solve_system(thermo, initial, times, options);
    state.counters["steps"] = static_cast<double>(solution.steps);
  }
}
BENCHMARK(BM_SolveSystem)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MasterEquation(benchmark::State& state) {
  static const Thermodynamics thermo(species_blind_rate(OneSpeciesRate::linear()));
  const DistributionTable nu = canonical_measure(thermo, 5, 1, {3, 3});
  const Generator generator(thermo.rate(), nu.space);
  for (auto _ : state) {
    benchmark::DoNotOptimize(master_equation_evolve(generator, nu, 1.0).probabilities.data());
  }
  state.counters["states"] = static_cast<double>(nu.space->size());
}
BENCHMARK(BM_MasterEquation)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
