#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zrp/one_species.hpp"
#include "zrp/profile.hpp"
#include "zrp/thermo.hpp"
#include "zrp/types.hpp"

namespace zrp {

/// Two density fields on the periodic grid (h = 1/M)^d, indexed like Torus
/// sites: point i has coordinates (i mod M, i/M mod M, ...).
struct PdeField {
  Count M = 0;
  int dimension = 1;
  std::vector<double> rho1;
  std::vector<double> rho2;
  double t = 0.0;
  double dt = 0.0;  // last regular (untruncated) step used to reach t
  std::string scheme;

  std::size_t points() const { return rho1.size(); }
  /// h^d Σ ρ_i.
  double mass(int species) const;
  /// Grid field of a profile; point i has first coordinate u = (i mod M) / M.
  static PdeField from_profile(const Profile& profile, Count M, int dimension = 1);
};

/// One scalar density on the same grid (the sum ρ̂ = ρ1 + ρ2 in §2.1).
struct ScalarField {
  Count M = 0;
  int dimension = 1;
  std::vector<double> rho;
  double t = 0.0;
  double dt = 0.0;
  std::string scheme;

  std::size_t points() const { return rho.size(); }
  double mass() const;
};

struct InvariantRegionReport {
  double min_rho1 = std::numeric_limits<double>::infinity();
  double min_rho2 = std::numeric_limits<double>::infinity();
  double max_sum = -std::numeric_limits<double>::infinity();
  /// Extrema of the t = 0 field (the envelope the discrete maximum principle predicts).
  double initial_min_rho1 = 0.0;
  double initial_min_rho2 = 0.0;
  double initial_max_sum = 0.0;
  bool breach = false;
  double breach_time = std::numeric_limits<double>::quiet_NaN();
  std::size_t breach_index = 0;  // grid point of the first breach
  std::string breach_reason;

  nlohmann::json to_json() const;
};

struct PdeOptions {
  Count M = 128;
  int dimension = 1;
  double safety = 0.9;
  /// Steps between re-evaluations of the CFL bound Λ.
  std::size_t cfl_refresh = 100;
  /// Values beyond the sub-critical region by more than this abort the solve.
  double breach_tolerance = 1e-8;
};

struct SystemSolution {
  std::vector<PdeField> trajectory;  // one field per requested output time
  InvariantRegionReport report;
  std::size_t steps = 0;
  /// Decoupled route only: the sum ρ̂ from its scalar stage at each output time.
  std::vector<ScalarField> scalar_stage;
};

struct ScalarSolution {
  std::vector<ScalarField> trajectory;
  std::size_t steps = 0;
};

/// Φ̂ on [0, s_max] for a one-species rate, tabulated once from the forward
/// map φ ↦ R̂(φ) and interpolated by cubic Hermite polynomials in ρ with the
/// exact slopes Φ̂' = φ / Var. s_max is ρ̂_c for condensing rates and the
/// requested range otherwise.
class MeanJumpRateTable {
 public:
  MeanJumpRateTable(const OneSpeciesThermo& thermo, double s_max, std::size_t nodes = 1025);

  double s_max() const { return s_max_; }
  bool condensing() const { return condensing_; }
  /// Φ̂(s); s is clamped to [0, s_max]. Callers check the range.
  double value(double s) const;
  double derivative(double s) const;
  /// a(s) = Φ̂(s)/s with a(0) = Φ̂'(0).
  double coefficient(double s) const;
  double coefficient_derivative(double s) const;

 private:
  std::size_t locate(double s) const;

  double s_max_ = 0.0;
  bool condensing_ = false;
  std::vector<double> rho_;
  std::vector<double> phi_;
  std::vector<double> slope_;
};

/// Explicit conservative scheme ρ^{n+1} = ρ^n + dt Δ_h Φ(ρ^n) for ∂ρ = ΔΦ(ρ).
/// Species-blind rates evaluate Φ = ρ Φ̂(|ρ|_1)/|ρ|_1 from a MeanJumpRateTable;
/// other rates call thermo.mean_jump_rate per grid point. Fields are stored at
/// each of `output_times` (increasing, >= 0); the last step before each output
/// time is truncated to land on it. Throws CriticalityError when a grid value
/// leaves the sub-critical region by more than the breach tolerance.
SystemSolution solve_system(const Thermodynamics& thermo, const PdeField& initial,
                            std::span<const double> output_times, const PdeOptions& options);

/// ∂ρ = ΔΦ̂(ρ) for a one-species rate with the same scheme.
ScalarSolution solve_scalar(const OneSpeciesThermo& thermo, const ScalarField& initial,
                            std::span<const double> output_times, const PdeOptions& options);

/// §4.3 decoupled route: solves the sum ρ̂ by solve_scalar's scheme, forms
/// a = Φ̂(ρ̂)/ρ̂ and advances the two linear equations ∂ρ_i = Δ(a ρ_i) on the
/// scalar stage's time grid, whose CFL bound is max(Φ̂', a) over the grid.
SystemSolution solve_species_blind_decoupled(const OneSpeciesThermo& base, const PdeField& initial,
                                             std::span<const double> output_times,
                                             const PdeOptions& options);

/// Extrema over the trajectory and the first exit from A = {ρ > 0,
/// ρ1 + ρ2 < ρ̂_c}. Positivity is required only of components that are
/// strictly positive in the first field; NaN or infinite values are always
/// breaches. The solvers pass the t = 0 field followed by their outputs.
InvariantRegionReport invariant_region_monitor(std::span<const PdeField> trajectory,
                                               double critical_density);

/// Periodic linear interpolation of a 1-D grid field at u ∈ [0, 1).
double interpolate_periodic(std::span<const double> values, double u);

/// CSV with columns t,x,rho1,rho2 (x is the grid index).
void write_pde_csv(std::span<const PdeField> trajectory, const std::filesystem::path& path);
void write_scalar_csv(std::span<const ScalarField> trajectory, const std::filesystem::path& path);
/// Manifest fields shared by every solve: scheme, M, d, dt, safety, rate.
nlohmann::json pde_manifest(const std::string& scheme, const PdeOptions& options, double dt,
                            const std::string& rate_description);

}  // namespace zrp
