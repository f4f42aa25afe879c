#include "zrp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <utility>

#include "zrp/errors.hpp"
#include "zrp/numerics.hpp"

namespace zrp {

namespace {

ReplicaStatistic summarise(std::vector<double> values) {
  ReplicaStatistic s;
  const std::size_t n = values.size();
  if (n == 0) return s;
  numerics::CompensatedSum sum;
  for (double v : values) sum.add(v);
  s.mean = sum.value() / static_cast<double>(n);
  if (n > 1) {
    numerics::CompensatedSum sq;
    for (double v : values) sq.add((v - s.mean) * (v - s.mean));
    s.standard_error = std::sqrt(sq.value() / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  s.value = std::abs(s.mean);
  s.per_replica = std::move(values);
  return s;
}

std::size_t snapshot_index(const TrajectoryRecord& record, double t) {
  for (std::size_t i = 0; i < record.snapshots.size(); ++i) {
    if (std::abs(record.snapshots[i].t_macro - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
  }
  throw DomainError("no snapshot at quadrature time " + std::to_string(t) + " in replica " +
                    std::to_string(record.replica));
}

/// Trapezoidal weights on an increasing grid (a single point gets weight 1).
std::vector<double> trapezoid_weights(std::span<const double> times) {
  std::vector<double> w(times.size(), 0.0);
  if (times.size() == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double h = times[i + 1] - times[i];
    if (!(h > 0.0)) throw DomainError("quadrature times must be strictly increasing");
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

/// Φ̄ at block densities, memoised on the integer block sums.
class BlockRateCache {
 public:
  BlockRateCache(const Thermodynamics& thermo, double block_volume)
      : thermo_(thermo), volume_(block_volume) {}

  Vec2 operator()(const Vec2& density) {
    const auto key = std::make_pair(std::llround(density[0] * volume_),
                                    std::llround(density[1] * volume_));
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      const Vec2 rho{static_cast<double>(key.first) / volume_,
                     static_cast<double>(key.second) / volume_};
      it = cache_.emplace(key, thermo_.extended_mean_jump_rate(rho)).first;
    }
    return it->second;
  }

 private:
  const Thermodynamics& thermo_;
  double volume_;
  std::map<std::pair<long long, long long>, Vec2> cache_;
};

/// Atoms of a one-site marginal with probability above kAtomFloor. f is
/// bounded, so the dropped mass (far below the marginal's own truncation
/// tolerance) changes the expectation by a negligible amount.
constexpr double kAtomFloor = 1e-17;

std::vector<std::pair<Counts, double>> marginal_atoms(const OneSiteMarginal& marginal) {
  std::vector<std::pair<Counts, double>> atoms;
  for (Count n = 0; n <= marginal.max_shell(); ++n) {
    for (Count j = 0; j <= n; ++j) {
      const Counts k{j, n - j};
      const double p = marginal.probability(k);
      if (p > kAtomFloor) atoms.emplace_back(k, p);
    }
  }
  return atoms;
}

/// E[f(k_0, ..., k_{w-1})] for i.i.d. k_j drawn from the marginal with `atoms`.
double product_expectation(const std::vector<std::pair<Counts, double>>& atoms,
                           const std::function<double(std::span<const Counts>)>& f,
                           std::vector<Counts>& window, std::size_t depth, double weight) {
  if (depth == window.size()) return weight * f(window);
  numerics::CompensatedSum s;
  for (const auto& [k, p] : atoms) {
    const double w = weight * p;
    if (w <= kAtomFloor) continue;
    window[depth] = k;
    s.add(product_expectation(atoms, f, window, depth + 1, w));
  }
  return s.value();
}

}  // namespace

ReplicaStatistic one_block_statistic(const Thermodynamics& thermo,
                                     std::span<const TrajectoryRecord> records, const TestField& F,
                                     Count ell, std::span<const double> quadrature_times) {
  if (records.empty()) throw DomainError("one-block statistic needs at least one replica");
  if (quadrature_times.empty()) throw DomainError("empty quadrature time grid");
  const std::vector<double> weights = trapezoid_weights(quadrature_times);
  const JumpRateSpec& rate = thermo.rate();
  std::vector<double> values;
  values.reserve(records.size());
  std::map<Count, BlockRateCache> caches;

  for (const TrajectoryRecord& rec : records) {
    const Torus torus(rec.side, rec.dimension);
    const double volume = std::pow(2.0 * ell + 1.0, rec.dimension);
    auto& cache = caches.try_emplace(rec.side, thermo, volume).first->second;
    const double inv_sites = 1.0 / static_cast<double>(torus.sites());
    numerics::CompensatedSum integral;
    for (std::size_t q = 0; q < quadrature_times.size(); ++q) {
      const double t = quadrature_times[q];
      const auto& eta = rec.snapshots[snapshot_index(rec, t)].eta;
      const std::vector<Vec2> block = empirical_density_field(torus, eta, ell);
      numerics::CompensatedSum space;
      for (std::size_t x = 0; x < eta.size(); ++x) {
        const Vec2 test = F(t, torus.first_coordinate(x));
        if (test.isZero(0.0)) continue;
        const RatePair g = rate(eta[x]);
        const Vec2 phi = cache(block[x]);
        space.add(test[0] * (g.g1 - phi[0]) + test[1] * (g.g2 - phi[1]));
      }
      integral.add(weights[q] * space.value() * inv_sites);
    }
    values.push_back(integral.value());
  }
  return summarise(std::move(values));
}

ReplicaStatistic local_equilibrium_test(const Thermodynamics& thermo, const Torus& torus,
                                        std::span<const std::vector<Counts>> configurations,
                                        const std::function<Vec2(double u)>& rho_t,
                                        const CylinderFunction& f,
                                        const std::function<double(double u)>& H) {
  if (f.offsets.empty() || !f.f) throw DomainError("cylinder function needs a window and a body");
  const auto [lo, hi] = std::minmax_element(f.offsets.begin(), f.offsets.end());
  if (static_cast<std::int64_t>(*hi) - *lo + 1 > static_cast<std::int64_t>(torus.side())) {
    throw DomainError("cylinder window exceeds the lattice");
  }
  const std::size_t sites = torus.sites();
  const double inv_sites = 1.0 / static_cast<double>(sites);

  // Site x + o e_1 for every window offset.
  auto shift = [&](std::size_t x, int offset) {
    for (int i = 0; i < std::abs(offset); ++i) x = torus.neighbour(x, 0, offset > 0 ? 0 : 1);
    return x;
  };
  std::vector<std::vector<std::size_t>> window_sites(sites);
  for (std::size_t x = 0; x < sites; ++x) {
    for (int o : f.offsets) window_sites[x].push_back(shift(x, o));
  }

  // Deterministic part: N^{-d} Σ_x H(x/N) f̃(ρ_t(x/N)); f̃ depends on u only.
  std::map<double, double> ftilde;
  std::vector<Counts> window(f.offsets.size());
  numerics::CompensatedSum expected;
  std::vector<double> h(sites);
  for (std::size_t x = 0; x < sites; ++x) {
    const double u = torus.first_coordinate(x);
    h[x] = H(u);
    if (h[x] == 0.0) continue;
    auto it = ftilde.find(u);
    if (it == ftilde.end()) {
      const Vec2 fugacity = thermo.extended_mean_jump_rate(rho_t(u));
      const OneSiteMarginal marginal(thermo, fugacity);
      const auto atoms = marginal_atoms(marginal);
      it = ftilde.emplace(u, product_expectation(atoms, f.f, window, 0, 1.0)).first;
    }
    expected.add(h[x] * it->second);
  }
  const double reference = expected.value() * inv_sites;

  std::vector<double> values;
  values.reserve(configurations.size());
  for (const auto& eta : configurations) {
    if (eta.size() != sites) throw DomainError("configuration size does not match the torus");
    numerics::CompensatedSum sum;
    for (std::size_t x = 0; x < sites; ++x) {
      if (h[x] == 0.0) continue;
      for (std::size_t j = 0; j < window.size(); ++j) window[j] = eta[window_sites[x][j]];
      sum.add(h[x] * f.f(window));
    }
    values.push_back(sum.value() * inv_sites - reference);
  }
  return summarise(std::move(values));
}

Count default_block_size(Count side) {
  return static_cast<Count>(std::floor(std::sqrt(static_cast<double>(side))));
}

std::vector<double> ConvergenceSweep::errors_at(double t_macro) const {
  std::vector<double> out;
  for (const SweepRow& row : rows) {
    if (row.t_macro == t_macro) out.push_back(row.l1_error);
  }
  return out;
}

nlohmann::json ConvergenceSweep::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["fitted_rate"] = fitted_rate;
  j["fit_residual"] = fit_residual;
  j["fits"] = nlohmann::json::array();
  for (const RateFit& f : fits) {
    j["fits"].push_back({{"t_macro", f.t_macro}, {"rate", f.rate}, {"residual", f.residual}});
  }
  j["rows"] = nlohmann::json::array();
  for (const SweepRow& r : rows) {
    j["rows"].push_back({{"N", r.side},
                         {"t_macro", r.t_macro},
                         {"ell", r.ell},
                         {"L1_error", r.l1_error},
                         {"stderr", r.standard_error},
                         {"replicas", r.replicas}});
  }
  j["pde_report"] = pde_report.to_json();
  return j;
}

ConvergenceSweep hydrodynamic_sweep(const Thermodynamics& thermo, const Profile& initial,
                                    const SweepOptions& options) {
  if (options.sides.empty()) throw DomainError("sweep needs at least one lattice side");
  if (options.t_macro.empty()) throw DomainError("empty t_macro grid");
  if (options.replicas == 0) throw DomainError("sweep needs at least one replica");
  if (!options.ell) throw DomainError("sweep needs a block-size rule");

  // PDE reference on a 1-D grid: the profile depends on the first coordinate only.
  PdeOptions pde = options.pde;
  pde.dimension = 1;
  if (pde.M == 0) pde.M = std::max<Count>(256, *std::max_element(options.sides.begin(), options.sides.end()));
  const PdeField start = PdeField::from_profile(initial, pde.M, 1);
  const SystemSolution reference = solve_system(thermo, start, options.t_macro, pde);

  ConvergenceSweep sweep;
  sweep.seed = options.seed;
  sweep.pde_report = reference.report;

  for (Count side : options.sides) {
    const Count ell = options.ell(side);
    const SlowlyVaryingProduct product(thermo, initial, side, options.dimension);
    const InitialSampler sampler = [&](std::uint64_t seed, std::uint64_t replica) {
      return product.sample(seed, replica);
    };
    RunOptions run_options;
    run_options.side = side;
    run_options.dimension = options.dimension;
    run_options.snapshot_times = options.t_macro;
    run_options.seed = options.seed;
    run_options.replicas = options.replicas;
    run_options.threads = options.threads;
    const std::vector<TrajectoryRecord> records = run(thermo.rate(), sampler, run_options);

    const Torus& torus = product.torus();
    const double inv_sites = 1.0 / static_cast<double>(torus.sites());
    for (std::size_t k = 0; k < options.t_macro.size(); ++k) {
      const PdeField& field = reference.trajectory[k];
      std::vector<Vec2> target(torus.sites());
      for (std::size_t x = 0; x < torus.sites(); ++x) {
        const double u = torus.first_coordinate(x);
        target[x] = {interpolate_periodic(field.rho1, u), interpolate_periodic(field.rho2, u)};
      }
      std::vector<double> errors;
      errors.reserve(records.size());
      for (const TrajectoryRecord& rec : records) {
        const std::vector<Vec2> block = empirical_density_field(torus, rec.snapshots[k].eta, ell);
        numerics::CompensatedSum l1_sum;
        for (std::size_t x = 0; x < block.size(); ++x) l1_sum.add(l1(block[x] - target[x]));
        errors.push_back(l1_sum.value() * inv_sites);
      }
      const ReplicaStatistic s = summarise(std::move(errors));
      sweep.rows.push_back({side, options.t_macro[k], ell, s.mean, s.standard_error, records.size()});
    }
  }
  std::stable_sort(sweep.rows.begin(), sweep.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.side < b.side;
  });

  for (double t : options.t_macro) {
    std::vector<double> log_n, log_e;
    for (const SweepRow& row : sweep.rows) {
      if (row.t_macro != t || !(row.l1_error > 0.0)) continue;
      log_n.push_back(std::log(static_cast<double>(row.side)));
      log_e.push_back(std::log(row.l1_error));
    }
    if (log_n.size() < 2) continue;
    const double slope = numerics::fitted_slope(log_n, log_e);
    double mean_n = 0.0, mean_e = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
      mean_n += log_n[i] / log_n.size();
      mean_e += log_e[i] / log_e.size();
    }
    double rss = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
      const double r = log_e[i] - (mean_e + slope * (log_n[i] - mean_n));
      rss += r * r;
    }
    sweep.fits.push_back({t, -slope, std::sqrt(rss / log_n.size())});
  }
  if (!sweep.fits.empty()) {
    sweep.fitted_rate = sweep.fits.back().rate;
    sweep.fit_residual = sweep.fits.back().residual;
  }
  return sweep;
}

void write_sweep_csv(const ConvergenceSweep& sweep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "N,t_macro,ell,L1_error,stderr\n";
  for (const SweepRow& r : sweep.rows) {
    out << r.side << ',' << r.t_macro << ',' << r.ell << ',' << r.l1_error << ','
        << r.standard_error << '\n';
  }
}

}  // namespace zrp
