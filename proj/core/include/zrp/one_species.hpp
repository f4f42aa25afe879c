#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "zrp/rates.hpp"
#include "zrp/series.hpp"
#include "zrp/types.hpp"

namespace zrp {

/// Grand-canonical thermodynamics of a one-species rate ĝ: partition function
/// Ẑ(φ) = Σ φ^k / ĝ!(k), density R̂, its inverse Φ̂, and the critical
/// fugacity / density. Used for the species-blind reduction and for the
/// single-species axes of a general two-species rate.
class OneSpeciesThermo {
 public:
  struct Point {
    double log_z = 0.0;
    double density = 0.0;
    double variance = 0.0;
    series::Outcome series;
  };

  /// `max_k` bounds the tabulated log ĝ!(k); set it to a finite box extent for
  /// tabulated rates.
  OneSpeciesThermo(std::function<double(Count)> rate, Count max_k = 100000,
                   double rel_tol = 1e-14);
  /// Uses exact closed forms for the linear (Ẑ = e^φ) and constant
  /// (Ẑ = 1/(1-φ)) rates when `closed_forms` is set; series otherwise.
  OneSpeciesThermo(const OneSpeciesRate& rate, Count max_k = 100000, double rel_tol = 1e-14,
                   bool closed_forms = true);

  /// Throws DivergenceError outside the domain of Ẑ.
  Point partition(double phi) const;
  double density(double phi) const { return partition(phi).density; }

  /// φ̂_c = lim ĝ!(k)^{1/k}; +inf when ĝ!(k)^{1/k} grows without bound.
  double critical_fugacity() const { return critical_fugacity_; }
  /// ρ̂_c = R̂(φ̂_c); +inf for non-condensing rates.
  double critical_density() const { return critical_density_; }
  bool condensing() const { return std::isfinite(critical_density_); }

  /// Φ̂ = R̂^{-1} on [0, ρ̂_c]; throws CriticalityError beyond ρ̂_c.
  double mean_jump_rate(double rho) const;
  /// Φ̂(min(ρ, ρ̂_c)).
  double extended_mean_jump_rate(double rho) const;

  double log_factorial(Count k) const { return log_factorial_.at(k); }
  Count max_k() const { return static_cast<Count>(log_factorial_.size() - 1); }

 private:
  void locate_criticality();

  std::vector<double> log_factorial_;
  double rel_tol_;
  OneSpeciesRate::Kind closed_form_ = OneSpeciesRate::Kind::custom;
  double critical_fugacity_ = std::numeric_limits<double>::infinity();
  double critical_density_ = std::numeric_limits<double>::infinity();
};

}  // namespace zrp
