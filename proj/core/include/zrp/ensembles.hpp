#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "zrp/profile.hpp"
#include "zrp/rates.hpp"
#include "zrp/thermo.hpp"
#include "zrp/types.hpp"

namespace zrp {

/// Nearest-neighbour geometry of the torus T_N^d with flattened site indices
/// x = Σ_j x_j N^j.
class Torus {
 public:
  Torus(Count side, int dimension);

  Count side() const { return side_; }
  int dimension() const { return dimension_; }
  std::size_t sites() const { return sites_; }
  /// Neighbour x ± e_axis (direction 0 is +, 1 is −).
  std::size_t neighbour(std::size_t x, int axis, int direction) const;
  /// First coordinate of x scaled to [0, 1).
  double first_coordinate(std::size_t x) const {
    return static_cast<double>(x % side_) / static_cast<double>(side_);
  }

 private:
  Count side_;
  int dimension_;
  std::size_t sites_;
};

/// Enumeration of M_{N,K}: configurations with K = (K1, K2) particles.
///
/// Index = rank1 · C2 + rank2 where rank_i is the lexicographic rank of the
/// species-i composition (stars and bars) over the flattened sites.
class StateSpace {
 public:
  static constexpr std::size_t kDefaultLimit = 10'000'000;

  /// Throws FeasibilityError when |M_{N,K}| exceeds `limit`.
  StateSpace(Count side, int dimension, Counts totals, std::size_t limit = kDefaultLimit);

  const Torus& torus() const { return torus_; }
  Counts totals() const { return totals_; }
  std::size_t size() const { return size_; }

  void decode(std::size_t index, std::vector<Counts>& eta) const;
  std::size_t encode(std::span<const Counts> eta) const;

  bool operator==(const StateSpace& other) const;

  /// |M_{N,K}|, or nullopt-like SIZE_MAX on overflow.
  static std::size_t count(Count side, int dimension, Counts totals);

 private:
  std::size_t compositions(Count mass, std::size_t sites) const;
  std::size_t rank(std::span<const Counts> eta, int species) const;
  void unrank(std::size_t r, int species, std::vector<Counts>& eta) const;

  Torus torus_;
  Counts totals_;
  std::size_t size_ = 0;
  std::size_t count2_ = 0;
  // comp_[m][s] = number of compositions of m into s sites (for m ≤ max K).
  std::vector<std::vector<std::size_t>> comp_;
};

/// Probability vector over an enumerated M_{N,K}.
struct DistributionTable {
  std::shared_ptr<const StateSpace> space;
  std::vector<double> probabilities;

  nlohmann::json to_json() const;
  static DistributionTable from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static DistributionTable load(const std::filesystem::path& path);
  double total_variation(const DistributionTable& other) const;
};

/// Generator matrix Q of the ZRP restricted to M_{N,K}, stored as CSR of the
/// off-diagonal rates with the exit rates on the side.
class Generator {
 public:
  Generator(const JumpRateSpec& rate, std::shared_ptr<const StateSpace> space);

  const std::shared_ptr<const StateSpace>& space() const { return space_; }
  std::size_t size() const { return exit_.size(); }
  double max_exit_rate() const;
  std::span<const double> exit_rates() const { return exit_; }

  /// out = μ Q (row vector).
  void apply_forward(std::span<const double> mu, std::span<double> out) const;
  /// out = Q f (column vector), i.e. (L f)(η).
  void apply(std::span<const double> f, std::span<double> out) const;

  /// Calls visit(from, to, rate) for every off-diagonal entry.
  template <class F>
  void for_each_edge(F&& visit) const {
    for (std::size_t i = 0; i + 1 < row_.size(); ++i) {
      for (std::size_t e = row_[i]; e < row_[i + 1]; ++e) visit(i, col_[e], rate_[e]);
    }
  }

 private:
  std::shared_ptr<const StateSpace> space_;
  std::vector<std::size_t> row_;
  std::vector<std::size_t> col_;
  std::vector<double> rate_;
  std::vector<double> exit_;
};

/// ν_{N,K}(η) ∝ Π_x 1/g!(η(x)).
DistributionTable canonical_measure(const Thermodynamics& thermo, Count side, int dimension,
                                    Counts totals,
                                    std::size_t limit = StateSpace::kDefaultLimit);
/// log W with W = Σ_η Π_x 1/g!(η(x)) the canonical normaliser.
double log_canonical_normaliser(const Thermodynamics& thermo, const StateSpace& space);

/// Σ μ log(μ/ν); +inf when μ is not absolutely continuous w.r.t. ν.
double relative_entropy(const DistributionTable& mu, const DistributionTable& nu);

/// Exact H(ν_{N,K} | ν^N_φ) = N^d log Z(φ) − ⟨K, log φ⟩ − log W.
double canonical_vs_product_entropy(const Thermodynamics& thermo, const StateSpace& space,
                                    Vec2 fugacity);

struct EquivalencePoint {
  Count side = 0;
  Counts totals;
  double value = 0.0;  // H(ν_{N,K} | ν^N_{R_c(ρ)}) / N^d
};

/// K_i = max(1, round(ρ_i N^d)) for ρ_i > 0 and 0 otherwise (see README).
Counts particle_numbers(Vec2 rho, Count side, int dimension);
std::vector<EquivalencePoint> equivalence_of_ensembles_trace(const Thermodynamics& thermo,
                                                             Vec2 rho,
                                                             std::span<const Count> sides,
                                                             int dimension = 1);

enum class TimeScale { raw, diffusive };

/// μ0 e^{tQ} by uniformisation (Poisson tail below 1e-12 per chunk).
DistributionTable master_equation_evolve(const Generator& generator,
                                         const DistributionTable& mu0, double t,
                                         TimeScale scale = TimeScale::raw);
/// H(μ_t | ν_ref) along a non-decreasing t grid.
std::vector<double> entropy_production_trace(const Generator& generator,
                                             const DistributionTable& mu0,
                                             const DistributionTable& reference,
                                             std::span<const double> times,
                                             TimeScale scale = TimeScale::raw);
/// −⟨f, L f⟩_ν.
double dirichlet_form(const Generator& generator, std::span<const double> f,
                      const DistributionTable& reference);
/// max_η |(ν Q)(η)|.
double stationarity_residual(const Generator& generator, const DistributionTable& nu);

/// Truncated one-site grand-canonical marginal ν̄¹_φ, sampled by drawing the
/// shell |k|_1 from its CDF and then k1 within the shell.
class OneSiteMarginal {
 public:
  OneSiteMarginal(const Thermodynamics& thermo, Vec2 fugacity, double tail_tol = 1e-12);
  /// Marginal of the sub-critical density ρ (fugacity Φ(ρ)).
  static OneSiteMarginal from_density(const Thermodynamics& thermo, Vec2 rho,
                                      double tail_tol = 1e-12);

  Vec2 fugacity() const { return fugacity_; }
  Count max_shell() const { return static_cast<Count>(shell_cdf_.size() - 1); }
  /// Mass dropped by the truncation before renormalisation.
  double tail_mass() const { return tail_mass_; }
  double probability(Counts k) const;
  /// Exact expectation of f under the truncated marginal.
  double expectation(const std::function<double(Counts)>& f) const;
  Counts sample(std::mt19937_64& rng) const;

 private:
  double shell_term(Count n, Count k1) const;  // unnormalised log weight

  const Thermodynamics* thermo_;
  Vec2 fugacity_;
  double log_z_ = 0.0;
  double tail_mass_ = 0.0;
  std::vector<double> shell_prob_;
  std::vector<double> shell_cdf_;
};

/// Product measure with slowly varying parameter ρ(x/N).
class SlowlyVaryingProduct {
 public:
  /// Throws CriticalityError when ρ(x/N) is not strictly sub-critical.
  SlowlyVaryingProduct(const Thermodynamics& thermo, const Profile& profile, Count side,
                       int dimension = 1, double tail_tol = 1e-12);

  const Torus& torus() const { return torus_; }
  const OneSiteMarginal& marginal(std::size_t site) const;
  /// Independent site draws; site x uses stream (seed, replica, x).
  std::vector<Counts> sample(std::uint64_t seed, std::uint64_t replica) const;

 private:
  Torus torus_;
  std::vector<std::size_t> site_marginal_;  // index into marginals_
  std::vector<OneSiteMarginal> marginals_;
};

}  // namespace zrp
