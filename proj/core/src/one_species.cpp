#include "zrp/one_species.hpp"

#include <algorithm>
#include <string>

#include "zrp/errors.hpp"

namespace zrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

OneSpeciesThermo::OneSpeciesThermo(std::function<double(Count)> rate, Count max_k,
                                   double rel_tol)
    : rel_tol_(rel_tol) {
  if (max_k < 2) throw DomainError("OneSpeciesThermo: max_k must be at least 2");
  log_factorial_.resize(static_cast<std::size_t>(max_k) + 1);
  log_factorial_[0] = 0.0;
  for (Count k = 1; k <= max_k; ++k) {
    const double g = rate(k);
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw DomainError("one-species rate must be positive and finite at k=" + std::to_string(k));
    }
    log_factorial_[k] = log_factorial_[k - 1] + std::log(g);
  }
  locate_criticality();
}

OneSpeciesThermo::OneSpeciesThermo(const OneSpeciesRate& rate, Count max_k, double rel_tol,
                                   bool closed_forms)
    : OneSpeciesThermo([rate](Count k) { return rate(k); }, max_k, rel_tol) {
  if (!closed_forms) return;
  if (rate.kind() == OneSpeciesRate::Kind::linear) {
    closed_form_ = rate.kind();
    critical_fugacity_ = kInf;
    critical_density_ = kInf;
  } else if (rate.kind() == OneSpeciesRate::Kind::constant) {
    closed_form_ = rate.kind();
    critical_fugacity_ = 1.0;
    critical_density_ = kInf;
  }
}

void OneSpeciesThermo::locate_criticality() {
  const Count max_k = this->max_k();

  // log φ̂_c = lim log ĝ!(k) / k, extrapolated from geometric samples near max_k.
  const double top = static_cast<double>(max_k);
  const double bottom = std::max(2.0, top / 64.0);
  constexpr int kSamples = 48;
  std::vector<double> ns, as;
  for (int i = 0; i < kSamples; ++i) {
    const auto k = static_cast<Count>(
        std::llround(bottom * std::pow(top / bottom, static_cast<double>(i) / (kSamples - 1))));
    if (!ns.empty() && static_cast<double>(k) <= ns.back()) continue;
    ns.push_back(static_cast<double>(k));
    as.push_back(log_factorial_[k] / static_cast<double>(k));
  }
  const auto limit = series::extrapolate_limit(ns, as, 1e-6);
  if (limit.unbounded) return;
  critical_fugacity_ = std::exp(limit.value);

  try {
    const Point p = partition(critical_fugacity_);
    critical_density_ = std::isfinite(p.density) ? p.density : kInf;
  } catch (const DivergenceError&) {
    critical_density_ = kInf;
  }
}

OneSpeciesThermo::Point OneSpeciesThermo::partition(double phi) const {
  if (!(phi >= 0.0)) throw DomainError("fugacity must be non-negative");
  Point pt;
  if (phi == 0.0) return pt;
  if (phi > critical_fugacity_ * (1.0 + 1e-12)) {
    throw DivergenceError("fugacity " + std::to_string(phi) + " beyond critical fugacity " +
                          std::to_string(critical_fugacity_));
  }
  if (closed_form_ == OneSpeciesRate::Kind::linear) {
    pt.log_z = phi;
    pt.density = phi;
    pt.variance = phi;
    return pt;
  }
  if (closed_form_ == OneSpeciesRate::Kind::constant) {
    if (phi >= 1.0) throw DivergenceError("partition function diverges at fugacity 1");
    pt.log_z = -std::log1p(-phi);
    pt.density = phi / (1.0 - phi);
    pt.variance = phi / ((1.0 - phi) * (1.0 - phi));
    return pt;
  }
  const double log_phi = std::log(phi);
  series::Control control;
  control.rel_tol = rel_tol_;
  control.cap = max_k();
  const auto fill = [&](Count n, std::vector<double>& terms) {
    terms.assign(1, static_cast<double>(n) * log_phi - log_factorial_[n]);
  };
  pt.series = series::sum_shells(fill, control, false);
  if (pt.series.status == series::Status::divergent) {
    throw DivergenceError("partition function diverges at fugacity " + std::to_string(phi));
  }
  pt.log_z = pt.series.log_z;
  pt.density = pt.series.mean[0];
  pt.variance = pt.series.covariance(0, 0);
  return pt;
}

double OneSpeciesThermo::mean_jump_rate(double rho) const {
  if (!(rho >= 0.0)) throw DomainError("density must be non-negative");
  if (rho == 0.0) return 0.0;
  if (condensing()) {
    if (rho > critical_density_ * (1.0 + 1e-12)) {
      throw CriticalityError("density " + std::to_string(rho) + " exceeds critical density " +
                             std::to_string(critical_density_));
    }
    if (rho >= critical_density_) return critical_fugacity_;
  }
  if (closed_form_ == OneSpeciesRate::Kind::linear) return rho;
  if (closed_form_ == OneSpeciesRate::Kind::constant) return rho / (1.0 + rho);
  const double x_max = std::log(critical_fugacity_);  // +inf when unbounded

  // Bracket log φ: R is increasing in log φ. Densities at or beyond a
  // divergent boundary count as too large.
  const auto density_at = [&](double x) {
    try {
      const double r = partition(std::exp(x)).density;
      return std::isfinite(r) ? r : kInf;
    } catch (const DivergenceError&) {
      return kInf;
    }
  };
  double lo = -kInf, hi = condensing() ? x_max : kInf;
  double x = std::min(std::log(rho), x_max - 1e-3);
  for (int i = 0; i < 2000 && !(lo > -kInf && hi < kInf); ++i) {
    if (density_at(x) < rho) {
      lo = x;
      x = std::isfinite(x_max) ? x_max - 0.5 * (x_max - x) : x + 1.0;
    } else {
      hi = x;
      x -= 1.0;
    }
  }
  if (!(lo > -kInf) || !(hi < kInf)) throw Error("mean_jump_rate: failed to bracket density");

  // Safeguarded Newton in log φ; dR/d log φ = Var.
  x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    Point p;
    try {
      p = partition(std::exp(x));
    } catch (const DivergenceError&) {
      p.density = kInf;
    }
    if (!std::isfinite(p.density)) {
      hi = x;
      x = 0.5 * (lo + hi);
      continue;
    }
    const double f = p.density - rho;
    if (std::abs(f) <= 1e-13 * (1.0 + rho)) return std::exp(x);
    if (f < 0.0) lo = x; else hi = x;
    double next = x - f / p.variance;
    if (!(p.variance > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * (1.0 + std::abs(x))) return std::exp(next);
    x = next;
  }
  return std::exp(x);
}

double OneSpeciesThermo::extended_mean_jump_rate(double rho) const {
  return mean_jump_rate(std::min(rho, critical_density_));
}

}  // namespace zrp
