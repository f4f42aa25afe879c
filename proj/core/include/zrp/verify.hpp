#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "zrp/ensembles.hpp"
#include "zrp/pde.hpp"
#include "zrp/profile.hpp"
#include "zrp/simulate.hpp"
#include "zrp/thermo.hpp"
#include "zrp/types.hpp"

namespace zrp {

/// Smooth test field F(t, u) evaluated at the first coordinate u of x/N.
using TestField = std::function<Vec2(double t, double u)>;

/// A Monte Carlo statistic with its per-replica values.
struct ReplicaStatistic {
  double value = 0.0;           // reported value (absolute value of the mean)
  double mean = 0.0;            // signed replica mean
  double standard_error = 0.0;  // replica standard deviation / sqrt(replicas)
  std::vector<double> per_replica;
};

/// Theorem OBE statistic: trapezoidal quadrature over `quadrature_times` of
/// N^{-d} Σ_x ⟨F(t, x/N), g(η_t(x)) − Φ̄(η_t^ℓ(x))⟩ for each replica, then
/// averaged over replicas. Every quadrature time must match a snapshot time
/// of every record (tolerance 1e-12); otherwise DomainError is thrown.
ReplicaStatistic one_block_statistic(const Thermodynamics& thermo,
                                     std::span<const TrajectoryRecord> records, const TestField& F,
                                     Count ell, std::span<const double> quadrature_times);

/// Bounded cylinder function f(η) of the occupations at the window sites
/// x + offsets[j] e_1 (offsets along the first axis).
struct CylinderFunction {
  std::vector<int> offsets{0};
  std::function<double(std::span<const Counts>)> f;
};

/// Eq. (LocEq) discrepancy: per replica, N^{-d} Σ_x H(x/N) τ_x f(η) minus the
/// lattice quadrature N^{-d} Σ_x H(x/N) f̃(ρ_t(x/N)), where f̃(ρ) = ∫ f dν_{R_c(ρ)}
/// is the expectation under the truncated product of one-site marginals at
/// fugacity Φ̄(ρ), summed over window states of probability above 1e-17.
/// Throws DomainError when the window exceeds the lattice.
ReplicaStatistic local_equilibrium_test(const Thermodynamics& thermo, const Torus& torus,
                                        std::span<const std::vector<Counts>> configurations,
                                        const std::function<Vec2(double u)>& rho_t,
                                        const CylinderFunction& f,
                                        const std::function<double(double u)>& H);

/// ℓ(N) = ⌊N^{1/2}⌋, the default mesoscopic block size.
Count default_block_size(Count side);

struct SweepOptions {
  std::vector<Count> sides{64, 128, 256};
  std::vector<double> t_macro{0.05};
  std::function<Count(Count)> ell = default_block_size;
  std::size_t replicas = 32;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int dimension = 1;
  /// Reference PDE resolution and scheme options (1-D: profiles depend on u1 only).
  PdeOptions pde{};
};

struct SweepRow {
  Count side = 0;
  double t_macro = 0.0;
  Count ell = 0;
  double l1_error = 0.0;
  double standard_error = 0.0;
  std::size_t replicas = 0;
};

struct RateFit {
  double t_macro = 0.0;
  double rate = 0.0;      // −slope of log error against log N
  double residual = 0.0;  // RMS residual of the log-log fit
};

struct ConvergenceSweep {
  std::vector<SweepRow> rows;  // ordered by side, then by time
  std::vector<RateFit> fits;   // one per time with at least two sides
  double fitted_rate = 0.0;    // fit at the last time
  double fit_residual = 0.0;
  InvariantRegionReport pde_report;
  std::uint64_t seed = 0;

  /// Errors at one time, ordered like the side list.
  std::vector<double> errors_at(double t_macro) const;
  nlohmann::json to_json() const;
};

/// Theorem HL check: for each N, samples initial data from the slowly varying
/// product measure, simulates to each t_macro·N², block-averages with ℓ(N) and
/// takes the lattice-cell L¹ distance N^{-d} Σ_x |η^ℓ(x) − ρ_t(x/N)|_1 to the
/// PDE solution interpolated linearly at x/N. A PDE criticality abort
/// propagates as CriticalityError.
ConvergenceSweep hydrodynamic_sweep(const Thermodynamics& thermo, const Profile& initial,
                                    const SweepOptions& options);

/// CSV with columns N,t_macro,ell,L1_error,stderr.
void write_sweep_csv(const ConvergenceSweep& sweep, const std::filesystem::path& path);

}  // namespace zrp
