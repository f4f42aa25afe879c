// Acceptance criteria of spec.md, one test case per criterion. Each case
// prints a single [PASS]/[FAIL] summary line with the measured quantities.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"
#include "zrp/ensembles.hpp"
#include "zrp/errors.hpp"
#include "zrp/numerics.hpp"
#include "zrp/pde.hpp"
#include "zrp/simulate.hpp"
#include "zrp/thermo.hpp"
#include "zrp/verify.hpp"

using namespace zrp;
using zrp::test::report;
using zrp::test::Stopwatch;

namespace {

constexpr double kPi = std::numbers::pi;

Thermodynamics linear_thermo() { return Thermodynamics(species_blind_rate(OneSpeciesRate::linear())); }
Thermodynamics constant_thermo() {
  return Thermodynamics(species_blind_rate(OneSpeciesRate::constant()));
}
Thermodynamics evans_thermo() { return Thermodynamics(species_blind_rate(OneSpeciesRate::evans(4))); }

std::string fmt(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream os;
  os.precision(4);
  bool first = true;
  for (const auto& [k, v] : items) {
    os << (first ? "" : ", ") << k << "=" << v;
    first = false;
  }
  return os.str();
}

/// max over a 2-D box of f, by repeated grid zooming; f may return -inf
/// outside its domain.
double grid_maximum(const std::function<double(Vec2)>& f, Vec2 centre, double half_width) {
  constexpr int kPoints = 21;
  double best = -std::numeric_limits<double>::infinity();
  Vec2 arg = centre;
  for (int round = 0; round < 14; ++round) {
    for (int i = 0; i < kPoints; ++i) {
      for (int j = 0; j < kPoints; ++j) {
        const Vec2 mu = centre + half_width * Vec2(2.0 * i / (kPoints - 1) - 1.0,
                                                   2.0 * j / (kPoints - 1) - 1.0);
        const double v = f(mu);
        if (v > best) {
          best = v;
          arg = mu;
        }
      }
    }
    centre = arg;
    half_width /= 3.0;
  }
  return best;
}

}  // namespace

TEST_CASE("criterion 01: linear and constant partition functions") {
  Stopwatch clock;
  const Thermodynamics lin = linear_thermo();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unif(0.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec2 rho{unif(rng), unif(rng)};
    const Vec2 back = lin.partition_function(lin.mean_jump_rate(rho)).density;
    worst = std::max(worst, (back - rho).cwiseAbs().maxCoeff());
  }
  const double z_lin = std::exp(lin.partition_function({0.3, 0.2}).log_z);
  const double z_const = std::exp(constant_thermo().partition_function({0.3, 0.2}).log_z);
  const double elapsed = clock.seconds();
  const bool pass = worst <= 1e-8 && std::abs(z_lin - std::exp(0.5)) <= 1e-6 &&
                    std::abs(z_const - 2.0) <= 1e-8 && elapsed < 1.0;
  report("criterion 1", pass,
         fmt({{"max|R(Phi(rho))-rho|", worst}, {"Z_lin-e^0.5", z_lin - std::exp(0.5)},
              {"Z_const-2", z_const - 2.0}, {"seconds", elapsed}}));
  CHECK(worst <= 1e-8);
  CHECK(std::abs(z_lin - std::exp(0.5)) <= 1e-6);
  CHECK(std::abs(z_const - 2.0) <= 1e-8);
  CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 02: evans(4) criticality against a brute-force series") {
  Stopwatch clock;
  // Independent oracle: log ĝ!(k) for ĝ(k) = 1 + 4/k summed directly to k = 1e5.
  constexpr int kMax = 100000;
  std::vector<double> log_fact(kMax + 1, 0.0);
  for (int k = 1; k <= kMax; ++k) log_fact[k] = log_fact[k - 1] + std::log1p(4.0 / k);
  const double phi_c_brute = std::exp(log_fact[kMax] / kMax);  // ĝ!(k)^{1/k}
  // ρ̂_c = Σ k φ^k/ĝ!(k) / Σ φ^k/ĝ!(k) at the limiting fugacity lim ĝ(k) = 1.
  double num = 0.0, den = 0.0;
  for (int k = kMax; k >= 0; --k) {
    const double w = std::exp(-log_fact[k]);
    num += k * w;
    den += w;
  }
  const double rho_c_brute = num / den;

  const Thermodynamics evans = evans_thermo();
  const OneSpeciesThermo& base = *evans.species_blind();
  const double phi_c = base.critical_fugacity();
  const double rho_c = base.critical_density();
  const double directional = evans.directional_critical_fugacity({0.5, 0.5}).value;
  const double elapsed = clock.seconds();

  const bool pass = std::abs(phi_c - 1.0) <= 1e-3 && std::abs(rho_c - 0.5) <= 1e-3 &&
                    std::abs(phi_c_brute - phi_c) <= 1e-3 &&
                    std::abs(rho_c_brute - rho_c) <= 1e-3 &&
                    std::abs(directional - 0.5) <= 1e-3 && elapsed < 10.0;
  report("criterion 2", pass,
         fmt({{"phi_c", phi_c}, {"phi_c_brute", phi_c_brute}, {"rho_c", rho_c},
              {"rho_c_brute", rho_c_brute}, {"phi_c1(1/2,1/2)", directional},
              {"seconds", elapsed}}));
  CHECK(std::abs(phi_c - 1.0) <= 1e-3);
  CHECK(std::abs(rho_c - 0.5) <= 1e-3);
  CHECK(std::abs(phi_c_brute - phi_c) <= 1e-3);
  CHECK(std::abs(rho_c_brute - rho_c) <= 1e-3);
  CHECK(std::abs(directional - 0.5) <= 1e-3);
  CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 03: rate function against a gridded Legendre transform") {
  Stopwatch clock;
  struct Case {
    const char* name;
    Thermodynamics thermo;
    double max_density;  // ρ, λ drawn with |·|_1 below this
  };
  std::vector<Case> cases;
  cases.push_back({"linear", linear_thermo(), 3.0});
  cases.push_back({"constant", constant_thermo(), 3.0});
  cases.push_back({"evans(4)", evans_thermo(), 0.45});

  std::ostringstream detail;
  bool pass = true;
  std::mt19937_64 rng(303);
  for (Case& c : cases) {
    double worst = 0.0;
    for (int pair = 0; pair < 20; ++pair) {
      std::uniform_real_distribution<double> unif(0.02, c.max_density / 2.0);
      const Vec2 rho{unif(rng), unif(rng)};
      const Vec2 lambda{unif(rng), unif(rng)};
      const double module_value = c.thermo.rate_function(rho, lambda);
      const Thermodynamics& th = c.thermo;
      const auto objective = [&](Vec2 mu) {
        try {
          return lambda.dot(mu) - th.log_mgf(rho, mu);
        } catch (const DivergenceError&) {
          return -std::numeric_limits<double>::infinity();
        }
      };
      const double grid_value = grid_maximum(objective, Vec2::Zero(), 4.0);
      worst = std::max(worst, std::abs(module_value - grid_value));
    }
    detail << c.name << " max|diff|=" << worst << "; ";
    pass = pass && worst <= 1e-4;
    CHECK_MESSAGE(worst <= 1e-4, c.name);
  }
  const double elapsed = clock.seconds();
  detail << "seconds=" << elapsed;
  report("criterion 3", pass && elapsed < 30.0, detail.str());
  CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 04: equivalence of ensembles trace decreases") {
  Stopwatch clock;
  const std::vector<Count> sides{2, 3, 4, 5, 6};
  const auto lin = equivalence_of_ensembles_trace(linear_thermo(), {0.5, 0.5}, sides);
  const auto evans = equivalence_of_ensembles_trace(evans_thermo(), {0.2, 0.2}, sides);
  auto decreasing = [](const std::vector<EquivalencePoint>& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) {
      if (!(trace[i].value < trace[i - 1].value)) return false;
    }
    return true;
  };
  const double elapsed = clock.seconds();
  std::ostringstream detail;
  detail.precision(4);
  detail << "linear H/N:";
  for (const auto& p : lin) detail << ' ' << p.value;
  detail << "; evans(4) H/N:";
  for (const auto& p : evans) detail << ' ' << p.value;
  detail << "; seconds=" << elapsed;
  const bool pass = decreasing(lin) && decreasing(evans) && elapsed < 60.0;
  report("criterion 4", pass, detail.str());
  CHECK(decreasing(lin));
  CHECK(decreasing(evans));
  CHECK(elapsed < 60.0);
}

TEST_CASE("criterion 05: relative entropy is monotone along the master equation") {
  Stopwatch clock;
  std::vector<double> times;
  for (int i = 0; i < 10; ++i) times.push_back(0.05 * i);
  std::mt19937_64 rng(505);
  std::exponential_distribution<double> expo(1.0);
  double worst_increase = -std::numeric_limits<double>::infinity();
  for (const Thermodynamics& thermo : {linear_thermo(), evans_thermo()}) {
    const DistributionTable nu = canonical_measure(thermo, 3, 1, {2, 1});
    const Generator generator(thermo.rate(), nu.space);
    for (int law = 0; law < 20; ++law) {
      DistributionTable mu = nu;
      double total = 0.0;
      for (double& p : mu.probabilities) total += (p = expo(rng));
      for (double& p : mu.probabilities) p /= total;
      const auto trace = entropy_production_trace(generator, mu, nu, times, TimeScale::raw);
      for (std::size_t i = 1; i < trace.size(); ++i) {
        worst_increase = std::max(worst_increase, trace[i] - trace[i - 1]);
      }
    }
  }
  const double elapsed = clock.seconds();
  const bool pass = worst_increase <= 1e-10 && elapsed < 30.0;
  report("criterion 5", pass,
         fmt({{"max H(t_{i+1})-H(t_i)", worst_increase}, {"seconds", elapsed}}));
  CHECK(worst_increase <= 1e-10);
  CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 06: kinetic Monte Carlo matches the master equation") {
  Stopwatch clock;
  const Thermodynamics lin = linear_thermo();
  DistributionTable law = canonical_measure(lin, 3, 1, {2, 1});
  const std::vector<Counts> start{{2, 1}, {0, 0}, {0, 0}};
  std::fill(law.probabilities.begin(), law.probabilities.end(), 0.0);
  law.probabilities[law.space->encode(start)] = 1.0;
  const Generator generator(lin.rate(), law.space);
  const DistributionTable exact = master_equation_evolve(generator, law, 5.0, TimeScale::diffusive);

  RunOptions options;
  options.side = 3;
  options.snapshot_times = {5.0};
  options.seed = 20240601;
  options.replicas = 10000;
  const auto records = run(lin.rate(), [&](std::uint64_t, std::uint64_t) { return start; }, options);
  const double tv = empirical_distribution(law.space, records, 0).total_variation(exact);
  const double elapsed = clock.seconds();
  const bool pass = tv <= 0.02 && elapsed < 60.0;
  report("criterion 6", pass, fmt({{"TV", tv}, {"replicas", 10000}, {"seconds", elapsed}}));
  CHECK(tv <= 0.02);
  CHECK(elapsed < 60.0);
}

TEST_CASE("criterion 07: heat case against the Fourier solution") {
  Stopwatch clock;
  const Thermodynamics lin = linear_thermo();
  const Profile profile(ProfileComponent{0.5, 0.1, 0.0, 1}, ProfileComponent{0.5, 0.0, 0.0, 1});
  const std::vector<double> times{0.1};
  auto error_at = [&](Count M) {
    PdeOptions options;
    options.M = M;
    const SystemSolution s = solve_system(lin, PdeField::from_profile(profile, M), times, options);
    const PdeField& f = s.trajectory.back();
    double err = 0.0;
    for (Count i = 0; i < M; ++i) {
      const double u = static_cast<double>(i) / M;
      const double exact = 0.5 + 0.1 * std::exp(-4.0 * kPi * kPi * 0.1) * std::cos(2.0 * kPi * u);
      err = std::max({err, std::abs(f.rho1[i] - exact), std::abs(f.rho2[i] - 0.5)});
    }
    return err;
  };
  const double e32 = error_at(32), e64 = error_at(64), e128 = error_at(128);
  const std::vector<double> log_h{std::log(1.0 / 32), std::log(1.0 / 64), std::log(1.0 / 128)};
  const std::vector<double> log_e{std::log(e32), std::log(e64), std::log(e128)};
  const double order = numerics::fitted_slope(log_h, log_e);
  const double elapsed = clock.seconds();
  const bool pass = e128 <= 1e-4 && order >= 1.9 && elapsed < 10.0;
  report("criterion 7", pass,
         fmt({{"Linf(M=128)", e128}, {"Linf(M=64)", e64}, {"Linf(M=32)", e32}, {"order", order},
              {"seconds", elapsed}}));
  CHECK(e128 <= 1e-4);
  CHECK(order >= 1.9);
  CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 08: species-blind structure of the PDE") {
  Stopwatch clock;
  const Thermodynamics evans = evans_thermo();
  const OneSpeciesThermo& base = *evans.species_blind();
  // max |ρ0|_1 = 0.45 at u = 0.
  const Profile profile(ProfileComponent{0.2, 0.025, 0.0, 1}, ProfileComponent{0.2, 0.0, 0.025, 1});
  const Profile peaked(ProfileComponent{0.2, 0.025, 0.0, 1}, ProfileComponent{0.2, 0.025, 0.0, 1});
  PdeOptions options;
  options.M = 128;
  const std::vector<double> times{0.05, 0.2};

  double cross = 0.0, sum_vs_scalar = 0.0, min_component = 1.0, max_sum = 0.0;
  bool breach = false;
  for (const Profile& p : {profile, peaked}) {
    const PdeField start = PdeField::from_profile(p, options.M);
    const SystemSolution direct = solve_system(evans, start, times, options);
    const SystemSolution decoupled = solve_species_blind_decoupled(base, start, times, options);
    ScalarField sum;
    sum.M = options.M;
    for (std::size_t i = 0; i < start.points(); ++i) sum.rho.push_back(start.rho1[i] + start.rho2[i]);
    const ScalarSolution scalar = solve_scalar(base, sum, times, options);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const PdeField& a = direct.trajectory[k];
      const PdeField& b = decoupled.trajectory[k];
      for (std::size_t i = 0; i < a.points(); ++i) {
        if (times[k] == 0.05) {
          cross = std::max({cross, std::abs(a.rho1[i] - b.rho1[i]), std::abs(a.rho2[i] - b.rho2[i])});
        }
        sum_vs_scalar = std::max(sum_vs_scalar, std::abs(a.rho1[i] + a.rho2[i] - scalar.trajectory[k].rho[i]));
      }
    }
    for (const SystemSolution* s : {&direct, &decoupled}) {
      breach = breach || s->report.breach;
      min_component = std::min({min_component, s->report.min_rho1, s->report.min_rho2});
      max_sum = std::max(max_sum, s->report.max_sum);
    }
  }
  const double rho_c = base.critical_density();
  const double elapsed = clock.seconds();
  const bool mp = !breach && min_component > 0.0 && max_sum < rho_c;
  const bool pass = cross <= 5e-4 && sum_vs_scalar <= 5e-4 && mp && elapsed < 30.0;
  report("criterion 8", pass,
         fmt({{"system-vs-decoupled Linf", cross}, {"sum-vs-scalar Linf", sum_vs_scalar},
              {"min component", min_component}, {"max sum", max_sum}, {"rho_c", rho_c},
              {"seconds", elapsed}}));
  CHECK(cross <= 5e-4);
  CHECK(sum_vs_scalar <= 5e-4);
  CHECK(mp);
  CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 09: one-block statistic decreases in the block size") {
  Stopwatch clock;
  // evans(4): with the linear rate g = Φ̄ is linear and the statistic is a
  // pure smoothing difference that grows with ℓ (see README).
  const Thermodynamics evans = evans_thermo();
  const SlowlyVaryingProduct equilibrium(evans, Profile::constant({0.2, 0.2}), 256);
  RunOptions options;
  options.side = 256;
  options.seed = 909;
  options.replicas = 64;
  for (int i = 0; i < 8; ++i) options.snapshot_times.push_back(0.01 * i / 7.0);
  const auto records = run(
      evans.rate(), [&](std::uint64_t s, std::uint64_t r) { return equilibrium.sample(s, r); }, options);
  const TestField F = [](double, double u) {
    return Vec2{1.0 + 0.5 * std::cos(2.0 * kPi * u), 1.0 + 0.5 * std::sin(2.0 * kPi * u)};
  };
  const ReplicaStatistic s1 = one_block_statistic(evans, records, F, 1, options.snapshot_times);
  const ReplicaStatistic s4 = one_block_statistic(evans, records, F, 4, options.snapshot_times);
  const ReplicaStatistic s16 = one_block_statistic(evans, records, F, 16, options.snapshot_times);

  // Paired differences of the signed replica values; both means are positive.
  const std::size_t n = s1.per_replica.size();
  double mean = 0.0;
  for (std::size_t r = 0; r < n; ++r) mean += (s1.per_replica[r] - s16.per_replica[r]) / n;
  double var = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double d = s1.per_replica[r] - s16.per_replica[r] - mean;
    var += d * d / (n - 1);
  }
  const double se = std::sqrt(var / n);
  const double lower = mean - 1.96 * se;
  const double elapsed = clock.seconds();
  const bool pass = s1.mean > 0.0 && s16.mean > 0.0 && lower > 0.0 && elapsed < 300.0;
  report("criterion 9", pass,
         fmt({{"stat(l=1)", s1.value}, {"stat(l=4)", s4.value}, {"stat(l=16)", s16.value},
              {"paired diff", mean}, {"95% lower", lower}, {"seconds", elapsed}}));
  CHECK(s1.mean > 0.0);
  CHECK(s16.mean > 0.0);
  CHECK(lower > 0.0);
  CHECK(elapsed < 300.0);
}

TEST_CASE("criterion 10: hydrodynamic L1 error decreases in N") {
  Stopwatch clock;
  struct Case {
    const char* name;
    Thermodynamics thermo;
    Profile profile;
  };
  std::vector<Case> cases;
  cases.push_back({"linear", linear_thermo(),
                   Profile(ProfileComponent{0.5, 0.2, 0.0, 1}, ProfileComponent{0.5, 0.0, 0.0, 1})});
  cases.push_back({"evans(4)", evans_thermo(),
                   Profile(ProfileComponent{0.2, 0.025, 0.0, 1}, ProfileComponent{0.2, 0.025, 0.0, 1})});
  std::ostringstream detail;
  detail.precision(4);
  bool pass = true;
  for (const Case& c : cases) {
    SweepOptions options;
    options.sides = {64, 128, 256};
    options.t_macro = {0.05};
    options.replicas = 128;
    options.seed = 1010;
    const ConvergenceSweep sweep = hydrodynamic_sweep(c.thermo, c.profile, options);
    const std::vector<double> e = sweep.errors_at(0.05);
    const bool decreasing = e.size() == 3 && e[1] < e[0] && e[2] < e[1];
    detail << c.name << " L1:";
    for (const SweepRow& row : sweep.rows) detail << ' ' << row.l1_error << "(±" << row.standard_error << ')';
    detail << " rate=" << sweep.fitted_rate << " breach=" << sweep.pde_report.breach << "; ";
    pass = pass && decreasing && sweep.fitted_rate > 0.0 && !sweep.pde_report.breach;
    CHECK_MESSAGE(decreasing, c.name);
    CHECK_MESSAGE(sweep.fitted_rate > 0.0, c.name);
    CHECK_MESSAGE(!sweep.pde_report.breach, c.name);
  }
  const double elapsed = clock.seconds();
  detail << "seconds=" << elapsed;
  report("criterion 10", pass && elapsed < 1200.0, detail.str());
  CHECK(elapsed < 1200.0);
}
