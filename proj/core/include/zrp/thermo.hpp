#pragma once

#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "zrp/one_species.hpp"
#include "zrp/rates.hpp"
#include "zrp/types.hpp"

namespace zrp {

/// Fugacity pair with the quantities of the grand-canonical state ν̄¹_φ.
struct GrandCanonicalPoint {
  Vec2 fugacity = Vec2::Zero();
  double log_z = 0.0;
  Vec2 density = Vec2::Zero();
  Mat2 covariance = Mat2::Zero();
  Count truncation_k = 0;             // last shell summed (0 for closed forms)
  double truncation_error_bound = 0.0;
};

struct DirectionalFugacity {
  Vec2 direction = Vec2::Zero();  // ℓ1-normalised ŷ
  bool unbounded = false;          // g!(k)^{1/|k|} → ∞ along the ray
  double log_value = 0.0;          // μ_{c;1}(ŷ)
  double value = 0.0;              // φ_{c;1}(ŷ)
  bool converged = true;
  double residual = 0.0;
  /// Limit of log g(k) along the ray: the contact point μ* ∈ ∂D_𝒵 with
  /// outward normal ŷ (NaN on the axes, where it is not determined).
  Vec2 boundary_log_fugacity = Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
  std::vector<double> trace_n;     // sample shells |k|_1
  std::vector<double> trace_value; // g!(k)^{1/|k|_1} along the ray
};

struct RecessionEstimate {
  bool unbounded = false;
  double value = 0.0;
  double residual = 0.0;
};

struct PhaseDiagramSample {
  Vec2 direction = Vec2::Zero();  // ℓ1-normalised
  double directional_fugacity = 0.0;
  Vec2 boundary_fugacity = Vec2::Zero();  // contact point of D_Z with normal ŷ
  Vec2 critical_density = Vec2::Zero();   // R(boundary point); +inf if Z diverges there
};

struct PhaseDiagram {
  std::vector<PhaseDiagramSample> samples;
  bool condensing = false;
};

/// Grand-canonical thermodynamics of a two-species rate.
///
/// Species-blind rates use the §2.1 reduction to the one-species functions
/// (Ẑ, R̂, Φ̂) when `closed_forms` is set; the general route sums the double
/// series, inverts R by Newton iteration and maximises along the boundary of
/// the fugacity domain. Instances are immutable and thread-safe.
class Thermodynamics {
 public:
  struct Options {
    double rel_tol = 1e-14;
    Count shell_cap = 2048;        // last |k|_1 shell summed explicitly in 2-D
    Count probation = 64;
    Count one_species_cap = 100000;
    Count ray_length = 100000;     // k_max of the directional-fugacity ray
    bool closed_forms = true;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
  };

  explicit Thermodynamics(JumpRateSpec rate);
  Thermodynamics(JumpRateSpec rate, Options options);

  const JumpRateSpec& rate() const;
  const Options& options() const;
  /// One-species model on the axis of `species` (the base model when species-blind).
  const OneSpeciesThermo& axis(int species) const;
  /// Base one-species model for species-blind rates, nullptr otherwise.
  const OneSpeciesThermo* species_blind() const;
  bool uses_closed_forms() const;

  /// Z(φ), R(φ), Cov at φ. Throws DivergenceError when φ ∉ D_Z.
  GrandCanonicalPoint partition_function(Vec2 phi) const;
  /// Same quantities from the double series, never from closed forms.
  GrandCanonicalPoint partition_series(Vec2 phi) const;

  /// Φ = R^{-1}; throws CriticalityError for ρ at or beyond criticality.
  Vec2 mean_jump_rate(Vec2 rho) const;
  /// Φ̄, the maximiser of ⟨ρ, log φ⟩ − log Z(φ) over D_Z.
  Vec2 extended_mean_jump_rate(Vec2 rho) const;
  /// R_c(ρ) = R(Φ̄(ρ)).
  Vec2 condensed_density(Vec2 rho) const;
  bool is_subcritical(Vec2 rho) const;

  /// S(ρ) = ⟨ρ, log Φ̄(ρ)⟩ − log Z(Φ̄(ρ)).
  double entropy(Vec2 rho) const;
  /// Λ_ρ(λ) = log Z(e^λ Φ(ρ)) − log Z(Φ(ρ)).
  double log_mgf(Vec2 rho, Vec2 lambda) const;
  /// Λ*_ρ(λ) = S(λ) − ⟨λ, log Φ(ρ)⟩ + log Z(Φ(ρ)).
  double rate_function(Vec2 rho, Vec2 lambda) const;
  /// DΦ(ρ) by central differences with step 1e-5 (1 + |ρ|_1).
  Mat2 mean_jump_rate_jacobian(Vec2 rho) const;
  /// Ψ(ρ, λ) = Φ̄(λ) − Φ(ρ) − DΦ(ρ)(λ − ρ).
  Vec2 quasi_potential(Vec2 rho, Vec2 lambda) const;

  /// Limit of g!(k)^{1/|k|_1} along the lattice ray nearest ŷ (|ŷ|_1 = 1).
  DirectionalFugacity directional_critical_fugacity(Vec2 direction,
                                                    std::optional<Count> k_max = {}) const;
  /// μ_{c;1}(t, 1-t): closed form for species-blind rates, ray estimate otherwise.
  double boundary_support(double t) const;
  /// Contact point μ* ∈ ∂D_𝒵 with outward normal (t, 1-t), t ∈ (0, 1).
  Vec2 boundary_log_fugacity(double t) const;

  /// S_∞(ŷ) for |ŷ|_2 = 1, extrapolated from S(sŷ)/s.
  RecessionEstimate recession_entropy(Vec2 direction) const;
  PhaseDiagram phase_diagram(int resolution) const;

  /// log g!(k), from the cached shell table when |k|_1 is within the cap.
  double log_g_factorial(Counts k) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;

  Vec2 newton_inverse(Vec2 rho) const;
  Vec2 boundary_maximiser(Vec2 rho) const;
};

/// |Z(φ) − Ẑ(φ1 + φ2)| / Ẑ with Z from the double series of the species-blind rate.
double species_blind_z_identity_residual(const OneSpeciesRate& base, Vec2 phi);

struct RatioDiagnostic {
  double value = 0.0;
  Vec2 rho_at = Vec2::Zero();
  Vec2 lambda_at = Vec2::Zero();
};

/// sup |Ψ(ρ,λ)|_1 / Λ*_ρ(λ) over ρ ∈ `compact`, λ ∈ `lambdas` with λ ≠ ρ.
RatioDiagnostic ratio_diagnostic(const Thermodynamics& thermo, std::span<const Vec2> compact,
                                 std::span<const Vec2> lambdas);

/// Columns y1,y2,phi_c_1,phi_c_2,rho_c_1,rho_c_2.
void write_phase_diagram_csv(const PhaseDiagram& diagram, const std::filesystem::path& path);

}  // namespace zrp
