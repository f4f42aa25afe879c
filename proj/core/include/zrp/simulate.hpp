#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "zrp/ensembles.hpp"
#include "zrp/rates.hpp"
#include "zrp/types.hpp"

namespace zrp {

/// Occupations η: T_N^d → N0² with cached per-species totals.
struct LatticeConfiguration {
  Torus torus{1, 1};
  std::vector<Counts> eta;
  Counts totals;

  LatticeConfiguration() = default;
  LatticeConfiguration(Torus t, std::vector<Counts> occupations);
  /// Throws Error when the cached totals disagree with the site sum.
  void check_totals() const;
};

/// Binary indexed tree over non-negative site intensities.
class FenwickTree {
 public:
  explicit FenwickTree(std::span<const double> values = {});
  void assign(std::span<const double> values);
  void add(std::size_t index, double delta);
  double total() const { return total_; }
  /// Smallest index whose inclusive prefix sum exceeds `target`.
  std::size_t find(double target) const;

 private:
  std::vector<double> tree_;
  double total_ = 0.0;
  std::size_t top_bit_ = 0;
};

/// Continuous-time kinetic Monte Carlo for the nearest-neighbour symmetric ZRP.
class KineticMonteCarlo {
 public:
  static constexpr std::uint64_t kRefreshInterval = 1'000'000;

  KineticMonteCarlo(const JumpRateSpec& rate, LatticeConfiguration config);

  /// Performs one jump and returns the exponential waiting time before it.
  /// Throws FrozenStateError when the total intensity is zero.
  double step(std::mt19937_64& rng);
  /// The two halves of step(): an Exponential(total intensity) waiting time,
  /// and the jump chosen from the current intensities.
  double draw_waiting_time(std::mt19937_64& rng) const;
  void jump(std::mt19937_64& rng);

  const LatticeConfiguration& configuration() const { return config_; }
  double total_intensity() const { return tree_.total(); }
  double recomputed_intensity() const;
  std::uint64_t events() const { return events_; }

 private:
  double site_intensity(Counts k) const;
  void refresh();

  const JumpRateSpec* rate_;
  LatticeConfiguration config_;
  std::vector<double> site_rate_;
  FenwickTree tree_;
  std::uint64_t events_ = 0;
};

struct Snapshot {
  double t_macro = 0.0;
  double t_micro = 0.0;
  std::vector<Counts> eta;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  Count side = 0;
  int dimension = 1;
  Counts totals;
  std::vector<Snapshot> snapshots;
  std::uint64_t events = 0;
  bool frozen = false;  // stopped early on an empty lattice
};

/// Draws the initial configuration of a replica.
using InitialSampler = std::function<std::vector<Counts>(std::uint64_t seed, std::uint64_t replica)>;

struct RunOptions {
  Count side = 0;
  int dimension = 1;
  std::vector<double> snapshot_times;  // macroscopic, strictly increasing, >= 0
  std::uint64_t seed = 0;
  std::size_t replicas = 1;
  unsigned threads = 1;
};

/// Stream id of the event loop; initial samplers use (seed, replica, site).
inline constexpr std::uint64_t kDynamicsStream = ~std::uint64_t{0};

/// Simulates one replica to microscopic time t·N² for each snapshot time t.
/// Snapshots hold the exact state at the target time (the cadlag path value).
TrajectoryRecord run_replica(const JumpRateSpec& rate, const InitialSampler& sampler,
                             const RunOptions& options, std::uint64_t replica);
/// All replicas, fanned out over `options.threads` workers; output order is
/// the replica order regardless of thread count.
std::vector<TrajectoryRecord> run(const JumpRateSpec& rate, const InitialSampler& sampler,
                                  const RunOptions& options);

/// η^ℓ(x) = (2ℓ+1)^{-d} Σ_{|y|_∞ ≤ ℓ} η(x+y). Throws DomainError if 2ℓ+1 > N.
Vec2 block_average(const Torus& torus, std::span<const Counts> eta, Count ell, std::size_t x);
/// block_average at every site.
std::vector<Vec2> empirical_density_field(const Torus& torus, std::span<const Counts> eta,
                                          Count ell);

/// Empirical law over M_{N,K} of snapshot `index` across records.
DistributionTable empirical_distribution(std::shared_ptr<const StateSpace> space,
                                         std::span<const TrajectoryRecord> records,
                                         std::size_t index);

/// CSV with columns t_macro,x,eta1,eta2.
void write_snapshots_csv(const TrajectoryRecord& record, const std::filesystem::path& path);
/// CSV with columns t_macro,x,ell,rho1,rho2.
void write_field_csv(double t_macro, Count ell, std::span<const Vec2> field,
                     const std::filesystem::path& path, bool append = false);
/// Little-endian: header u32 d, u32 N, u32 K1, u32 K2, u64 seed, u32 snapshot
/// count; then per snapshot f64 t_macro and N^d row-major u32 pairs (η1, η2).
void write_snapshots_binary(const TrajectoryRecord& record, const std::filesystem::path& path);
TrajectoryRecord read_snapshots_binary(const std::filesystem::path& path);

}  // namespace zrp
