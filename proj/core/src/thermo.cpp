#include "zrp/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <string>

#include <Eigen/Dense>

#include "zrp/errors.hpp"
#include "zrp/numerics.hpp"
#include "zrp/series.hpp"

namespace zrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void check_density(const Vec2& rho) {
  if (!(rho[0] >= 0.0 && rho[1] >= 0.0) || !rho.allFinite()) {
    throw DomainError("densities must be finite and non-negative");
  }
}

void check_fugacity(const Vec2& phi) {
  if (!(phi[0] >= 0.0 && phi[1] >= 0.0) || !phi.allFinite()) {
    throw DomainError("fugacities must be finite and non-negative");
  }
}

// Samples shells geometrically in [top/64, top] for the log-growth extrapolation.
std::vector<Count> geometric_samples(Count top, int count) {
  std::vector<Count> out;
  const double hi = static_cast<double>(top);
  const double lo = std::max(2.0, hi / 64.0);
  for (int i = 0; i < count; ++i) {
    const auto k = static_cast<Count>(
        std::llround(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1))));
    if (out.empty() || k > out.back()) out.push_back(k);
  }
  return out;
}

}  // namespace

struct Thermodynamics::Impl {
  Impl(JumpRateSpec r, Options o) : rate(std::move(r)), options(o) {}

  JumpRateSpec rate;
  Options options;
  std::optional<OneSpeciesThermo> base;  // species-blind rates
  std::optional<OneSpeciesThermo> axis1, axis2;
  Count cap = 0;

  mutable std::once_flag table_once;
  mutable std::unique_ptr<LogFactorialTable> table;

  const LogFactorialTable& log_table() const {
    std::call_once(table_once, [this] { table = std::make_unique<LogFactorialTable>(rate, cap); });
    return *table;
  }
};

Thermodynamics::Thermodynamics(JumpRateSpec rate) : Thermodynamics(std::move(rate), Options{}) {}

Thermodynamics::Thermodynamics(JumpRateSpec rate, Options options) {
  auto impl = std::make_shared<Impl>(std::move(rate), options);
  impl->cap = options.shell_cap;
  if (auto extent = impl->rate.box_extent()) impl->cap = std::min(impl->cap, *extent);
  if (const auto* base = impl->rate.species_blind_base()) {
    impl->base.emplace(*base, options.one_species_cap, options.rel_tol, options.closed_forms);
  } else {
    const Count axis_cap = std::min(options.one_species_cap, *impl->rate.box_extent());
    impl->axis1.emplace(impl->rate.axis_rate(0), axis_cap, options.rel_tol);
    impl->axis2.emplace(impl->rate.axis_rate(1), axis_cap, options.rel_tol);
  }
  impl_ = std::move(impl);
}

const JumpRateSpec& Thermodynamics::rate() const { return impl_->rate; }
const Thermodynamics::Options& Thermodynamics::options() const { return impl_->options; }

const OneSpeciesThermo& Thermodynamics::axis(int species) const {
  if (impl_->base) return *impl_->base;
  return species == 0 ? *impl_->axis1 : *impl_->axis2;
}

const OneSpeciesThermo* Thermodynamics::species_blind() const {
  return impl_->base ? &*impl_->base : nullptr;
}

bool Thermodynamics::uses_closed_forms() const {
  return impl_->base.has_value() && impl_->options.closed_forms;
}

double Thermodynamics::log_g_factorial(Counts k) const {
  const Count n = k.total();
  if (impl_->base && n <= impl_->base->max_k()) {
    // g!(k) = k1! k2! ĝ!(n) / n!
    return std::lgamma(k.k1 + 1.0) + std::lgamma(k.k2 + 1.0) + impl_->base->log_factorial(n) -
           std::lgamma(n + 1.0);
  }
  if (n <= impl_->cap) return impl_->log_table()(k.k1, k.k2);
  return zrp::log_g_factorial(impl_->rate, k);
}

GrandCanonicalPoint Thermodynamics::partition_series(Vec2 phi) const {
  check_fugacity(phi);
  const auto& table = impl_->log_table();
  const double lp1 = phi[0] > 0.0 ? std::log(phi[0]) : -kInf;
  const double lp2 = phi[1] > 0.0 ? std::log(phi[1]) : -kInf;
  const auto fill = [&](Count n, std::vector<double>& terms) {
    terms.resize(n + 1);
    const double* lg = table.shell(n);
    for (Count j = 0; j <= n; ++j) {
      const Count k2 = n - j;
      if ((j > 0 && lp1 == -kInf) || (k2 > 0 && lp2 == -kInf)) {
        terms[j] = -kInf;
        continue;
      }
      terms[j] = (j > 0 ? j * lp1 : 0.0) + (k2 > 0 ? k2 * lp2 : 0.0) - lg[j];
    }
  };
  series::Control control{impl_->options.rel_tol, impl_->cap, impl_->options.probation};
  const auto out = series::sum_shells(fill, control, true);
  if (out.status == series::Status::divergent) {
    throw DivergenceError("partition function diverges at fugacity (" + std::to_string(phi[0]) +
                          "," + std::to_string(phi[1]) + ")");
  }
  GrandCanonicalPoint pt;
  pt.fugacity = phi;
  pt.log_z = out.log_z;
  pt.density = out.mean;
  pt.covariance = out.covariance;
  pt.truncation_k = out.last_shell;
  pt.truncation_error_bound = out.error_bound;
  return pt;
}

GrandCanonicalPoint Thermodynamics::partition_function(Vec2 phi) const {
  if (!uses_closed_forms()) return partition_series(phi);
  check_fugacity(phi);
  const double s = phi[0] + phi[1];
  const auto p = impl_->base->partition(s);
  GrandCanonicalPoint pt;
  pt.fugacity = phi;
  pt.log_z = p.log_z;
  pt.truncation_k = p.series.last_shell;
  pt.truncation_error_bound = p.series.error_bound;
  if (s > 0.0) {
    // Given |k|_1 = n the split is binomial with success probability φ1/s.
    const Vec2 frac = phi / s;
    pt.density = p.density * frac;
    const Mat2 outer = frac * frac.transpose();
    Mat2 diag = Mat2::Zero();
    diag(0, 0) = frac[0];
    diag(1, 1) = frac[1];
    pt.covariance = p.density * (diag - outer) + p.variance * outer;
  }
  return pt;
}

Vec2 Thermodynamics::mean_jump_rate(Vec2 rho) const {
  check_density(rho);
  const double r = rho.sum();
  if (r == 0.0) return Vec2::Zero();
  if (uses_closed_forms()) return rho * (impl_->base->mean_jump_rate(r) / r);
  if (rho[1] == 0.0) return Vec2(axis(0).mean_jump_rate(rho[0]), 0.0);
  if (rho[0] == 0.0) return Vec2(0.0, axis(1).mean_jump_rate(rho[1]));
  return newton_inverse(rho);
}

Vec2 Thermodynamics::newton_inverse(Vec2 rho) const {
  const auto& opt = impl_->options;
  const auto try_point = [&](const Vec2& x) -> std::optional<GrandCanonicalPoint> {
    try {
      auto pt = partition_series(x.array().exp().matrix());
      if (!pt.density.allFinite() || !pt.covariance.allFinite()) return std::nullopt;
      return pt;
    } catch (const DivergenceError&) {
      return std::nullopt;
    }
  };

  // Start at log ρ and halve the fugacity until the series converges.
  Vec2 x = rho.array().log().matrix();
  std::optional<GrandCanonicalPoint> pt;
  for (int i = 0; i < 200 && !(pt = try_point(x)); ++i) x.array() -= std::log(2.0);
  if (!pt) throw CriticalityError("mean_jump_rate: no convergent starting fugacity");

  const double tol = opt.newton_tol * (1.0 + rho.sum());
  Vec2 residual = pt->density - rho;
  // Iterates pinned against ∂D_Z by repeated short steps signal a
  // super-critical density; stop early instead of crawling along the boundary.
  int short_steps = 0;
  for (int it = 0; it < opt.newton_max_iter && short_steps < 4; ++it) {
    if (residual.lpNorm<Eigen::Infinity>() <= tol) return x.array().exp().matrix();
    // dR/d(log φ) = Cov.
    const Vec2 dx = pt->covariance.colPivHouseholderQr().solve(-residual);
    double step = 1.0;
    bool accepted = false;
    while (step > 1e-6) {
      const Vec2 trial = x + step * dx;
      if (auto next = try_point(trial)) {
        const Vec2 res = next->density - rho;
        if (res.norm() < residual.norm()) {
          x = trial;
          pt = next;
          residual = res;
          accepted = true;
          short_steps = step < 1.0 / 64.0 ? short_steps + 1 : 0;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  if (residual.lpNorm<Eigen::Infinity>() <= tol) return x.array().exp().matrix();
  throw CriticalityError("mean_jump_rate: Newton iteration failed to converge at density (" +
                         std::to_string(rho[0]) + "," + std::to_string(rho[1]) +
                         "); density at or beyond criticality");
}

bool Thermodynamics::is_subcritical(Vec2 rho) const {
  check_density(rho);
  if (uses_closed_forms()) return rho.sum() < impl_->base->critical_density();
  try {
    mean_jump_rate(rho);
    return true;
  } catch (const CriticalityError&) {
    return false;
  }
}

Vec2 Thermodynamics::extended_mean_jump_rate(Vec2 rho) const {
  check_density(rho);
  const double r = rho.sum();
  if (r == 0.0) return Vec2::Zero();
  if (uses_closed_forms()) return rho * (impl_->base->extended_mean_jump_rate(r) / r);
  if (rho[1] == 0.0) return Vec2(axis(0).extended_mean_jump_rate(rho[0]), 0.0);
  if (rho[0] == 0.0) return Vec2(0.0, axis(1).extended_mean_jump_rate(rho[1]));
  try {
    return newton_inverse(rho);
  } catch (const CriticalityError&) {
    return boundary_maximiser(rho);
  }
}

Vec2 Thermodynamics::boundary_maximiser(Vec2 rho) const {
  const auto objective = [&](double t) {
    const Vec2 mu = boundary_log_fugacity(t);
    if (!mu.allFinite()) return -kInf;
    try {
      return rho.dot(mu) - partition_function(mu.array().exp().matrix()).log_z;
    } catch (const DivergenceError&) {
      return -kInf;
    }
  };
  // Ray estimates of μ_c degrade next to the axes, where the ray is the axis.
  const auto best = numerics::golden_section_max(objective, 1e-3, 1.0 - 1e-3, 1e-10);
  if (!std::isfinite(best.value)) {
    throw CriticalityError("extended_mean_jump_rate: no admissible boundary maximiser");
  }
  return boundary_log_fugacity(best.argmax).array().exp().matrix();
}

Vec2 Thermodynamics::condensed_density(Vec2 rho) const {
  const Vec2 phi = extended_mean_jump_rate(rho);
  if (phi.sum() == 0.0) return Vec2::Zero();
  const Vec2 rc = partition_function(phi).density;
  // Sub-critically R_c is the identity; return ρ itself to avoid round-off.
  return is_subcritical(rho) ? rho : rc.cwiseMin(rho);
}

double Thermodynamics::entropy(Vec2 rho) const {
  check_density(rho);
  if (rho.sum() == 0.0) return 0.0;
  const Vec2 phi = extended_mean_jump_rate(rho);
  const auto pt = partition_function(phi);
  return numerics::xlogy(rho[0], phi[0]) + numerics::xlogy(rho[1], phi[1]) - pt.log_z;
}

double Thermodynamics::log_mgf(Vec2 rho, Vec2 lambda) const {
  const Vec2 phi = mean_jump_rate(rho);
  const double base = partition_function(phi).log_z;
  const Vec2 tilted = phi.array() * lambda.array().exp();
  return partition_function(tilted).log_z - base;
}

double Thermodynamics::rate_function(Vec2 rho, Vec2 lambda) const {
  check_density(lambda);
  const Vec2 phi = mean_jump_rate(rho);
  const double log_z = partition_function(phi).log_z;
  return entropy(lambda) - numerics::xlogy(lambda[0], phi[0]) -
         numerics::xlogy(lambda[1], phi[1]) + log_z;
}

Mat2 Thermodynamics::mean_jump_rate_jacobian(Vec2 rho) const {
  check_density(rho);
  const double h = 1e-5 * (1.0 + rho.sum());
  Mat2 jac;
  for (int j = 0; j < 2; ++j) {
    Vec2 e = Vec2::Zero();
    e[j] = h;
    Vec2 column;
    bool done = false;
    if (rho[j] >= h) {
      try {
        column = (mean_jump_rate(rho + e) - mean_jump_rate(rho - e)) / (2.0 * h);
        done = true;
      } catch (const CriticalityError&) {
      }
      if (!done) {
        // Next to the critical boundary: second-order backward difference.
        column = (3.0 * mean_jump_rate(rho) - 4.0 * mean_jump_rate(rho - e) +
                  mean_jump_rate(rho - 2.0 * e)) /
                 (2.0 * h);
        done = true;
      }
    }
    if (!done) {
      column = (-3.0 * mean_jump_rate(rho) + 4.0 * mean_jump_rate(rho + e) -
                mean_jump_rate(rho + 2.0 * e)) /
               (2.0 * h);
    }
    jac.col(j) = column;
  }
  return jac;
}

Vec2 Thermodynamics::quasi_potential(Vec2 rho, Vec2 lambda) const {
  check_density(lambda);
  const Vec2 phi_rho = mean_jump_rate(rho);
  if (lambda == rho) return Vec2::Zero();
  return extended_mean_jump_rate(lambda) - phi_rho - mean_jump_rate_jacobian(rho) * (lambda - rho);
}

DirectionalFugacity Thermodynamics::directional_critical_fugacity(Vec2 direction,
                                                                  std::optional<Count> k_max) const {
  check_density(direction);
  if (direction.sum() <= 0.0) throw DomainError("direction must be non-zero");
  DirectionalFugacity out;
  out.direction = direction / direction.sum();
  const double t = out.direction[0];

  Count top = k_max.value_or(impl_->options.ray_length);
  if (auto extent = impl_->rate.box_extent()) {
    top = std::min<Count>(top, static_cast<Count>(*extent / std::max(t, 1.0 - t)));
  }
  if (top < 16) throw DomainError("directional_critical_fugacity: ray too short");

  const auto samples = geometric_samples(top, 48);
  std::vector<double> ns, as, b1, b2;
  // Prefix sums of log g_i along the path; windowed means average out the
  // lattice rounding of the ray.
  std::vector<double> cum1(top + 1, 0.0), cum2(top + 1, 0.0);
  Counts k{0, 0};
  double log_fact = 0.0;
  std::size_t next_sample = 0;
  for (Count n = 1; n <= top; ++n) {
    const auto target = static_cast<Count>(std::llround(t * static_cast<double>(n)));
    int species;
    if (target > k.k1) {
      ++k.k1;
      species = 0;
    } else {
      ++k.k2;
      species = 1;
    }
    const RatePair g = impl_->rate(k);
    if (!(g[species] > 0.0)) throw DomainError("vanishing rate along the directional ray");
    log_fact += std::log(g[species]);
    cum1[n] = cum1[n - 1] + (k.k1 > 0 ? std::log(g.g1) : 0.0);
    cum2[n] = cum2[n - 1] + (k.k2 > 0 ? std::log(g.g2) : 0.0);
    if (next_sample < samples.size() && n == samples[next_sample]) {
      const Count w = std::max<Count>(1, n / 16);
      ns.push_back(static_cast<double>(n));
      as.push_back(log_fact / static_cast<double>(n));
      b1.push_back((cum1[n] - cum1[n - w]) / w);
      b2.push_back((cum2[n] - cum2[n - w]) / w);
      ++next_sample;
    }
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    out.trace_n.push_back(ns[i]);
    out.trace_value.push_back(std::exp(as[i]));
  }
  const auto est = series::extrapolate_limit(ns, as, 1e-5);
  out.unbounded = est.unbounded;
  out.converged = est.converged;
  out.residual = est.residual;
  out.log_value = est.value;
  out.value = est.unbounded ? kInf : std::exp(est.value);
  // Windows must avoid the axis stretch where one coordinate is still 0.
  const double first_window = 0.9 * static_cast<double>(samples.front());
  if (!out.unbounded && std::min(t, 1.0 - t) * first_window >= 2.0) {
    out.boundary_log_fugacity = Vec2(series::extrapolate_limit(ns, b1, 1e-5).value,
                                     series::extrapolate_limit(ns, b2, 1e-5).value);
  }
  return out;
}

double Thermodynamics::boundary_support(double t) const {
  if (uses_closed_forms()) {
    const double phi_c = impl_->base->critical_fugacity();
    if (!std::isfinite(phi_c)) return kInf;
    return xlogx(t) + xlogx(1.0 - t) + std::log(phi_c);
  }
  const auto d = directional_critical_fugacity(Vec2(t, 1.0 - t));
  if (d.unbounded) return kInf;
  // Euler's identity for the 1-homogeneous support function is less
  // sensitive to the ray's lattice rounding than the g!^{1/n} fit.
  if (d.boundary_log_fugacity.allFinite()) return d.direction.dot(d.boundary_log_fugacity);
  return d.log_value;
}

Vec2 Thermodynamics::boundary_log_fugacity(double t) const {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("boundary parameter must lie in (0,1)");
  if (!uses_closed_forms()) {
    const auto d = directional_critical_fugacity(Vec2(t, 1.0 - t));
    if (d.unbounded) return Vec2::Constant(kInf);
    return d.boundary_log_fugacity;
  }
  const double m = boundary_support(t);
  if (!std::isfinite(m)) return Vec2::Constant(kInf);
  // Gradient of the 1-homogeneous support function y ↦ |y|_1 m(y1/|y|_1).
  const double slope = std::log(t) - std::log1p(-t);
  return Vec2(m + (1.0 - t) * slope, m - t * slope);
}

RecessionEstimate Thermodynamics::recession_entropy(Vec2 direction) const {
  check_density(direction);
  if (direction.norm() <= 0.0) throw DomainError("direction must be non-zero");
  const Vec2 y = direction / direction.norm();
  const bool fast = uses_closed_forms();
  const int count = fast ? 24 : 10;
  const double lo = 10.0, hi = fast ? 1e4 : 1e3;
  std::vector<double> ss, as;
  for (int i = 0; i < count; ++i) {
    const double s = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    ss.push_back(s);
    as.push_back(entropy(s * y) / s);
  }
  const auto est = series::extrapolate_limit(ss, as, 1e-5);
  RecessionEstimate out;
  out.unbounded = est.unbounded;
  out.value = est.value;
  out.residual = est.residual;
  return out;
}

PhaseDiagram Thermodynamics::phase_diagram(int resolution) const {
  if (resolution < 8) throw DomainError("phase_diagram needs at least 8 directions");
  PhaseDiagram out;
  for (int j = 0; j < resolution; ++j) {
    const double t = static_cast<double>(j) / (resolution - 1);
    PhaseDiagramSample s;
    s.direction = Vec2(t, 1.0 - t);
    if (j == 0 || j == resolution - 1) {
      const int species = j == 0 ? 1 : 0;
      const auto& one = axis(species);
      s.directional_fugacity = one.critical_fugacity();
      s.boundary_fugacity = Vec2::Zero();
      s.boundary_fugacity[species] = one.critical_fugacity();
      s.critical_density = Vec2::Zero();
      s.critical_density[species] = one.critical_density();
    } else {
      s.directional_fugacity = std::exp(boundary_support(t));
      const Vec2 mu = boundary_log_fugacity(t);
      s.boundary_fugacity = mu.array().exp().matrix();
      s.critical_density = Vec2::Constant(kInf);
      if (mu.allFinite()) {
        try {
          const auto pt = partition_function(s.boundary_fugacity);
          if (pt.density.allFinite()) s.critical_density = pt.density;
        } catch (const DivergenceError&) {
        }
      }
    }
    if (s.critical_density.allFinite()) out.condensing = true;
    out.samples.push_back(s);
  }
  return out;
}

double species_blind_z_identity_residual(const OneSpeciesRate& base, Vec2 phi) {
  check_fugacity(phi);
  if (phi.sum() == 0.0) return 0.0;
  Thermodynamics::Options options;
  options.closed_forms = false;
  const Thermodynamics general(species_blind_rate(base), options);
  const OneSpeciesThermo one(base);
  const double two_d = general.partition_series(phi).log_z;
  const double one_d = one.partition(phi.sum()).log_z;
  return std::abs(std::expm1(two_d - one_d));
}

RatioDiagnostic ratio_diagnostic(const Thermodynamics& thermo, std::span<const Vec2> compact,
                                 std::span<const Vec2> lambdas) {
  RatioDiagnostic out;
  for (const Vec2& rho : compact) {
    for (const Vec2& lambda : lambdas) {
      if (lambda == rho) continue;
      const double denom = thermo.rate_function(rho, lambda);
      if (!(denom > 0.0)) continue;
      const double ratio = thermo.quasi_potential(rho, lambda).lpNorm<1>() / denom;
      if (ratio > out.value) {
        out.value = ratio;
        out.rho_at = rho;
        out.lambda_at = lambda;
      }
    }
  }
  return out;
}

void write_phase_diagram_csv(const PhaseDiagram& diagram, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "y1,y2,phi_c_1,phi_c_2,rho_c_1,rho_c_2\n";
  for (const auto& s : diagram.samples) {
    out << s.direction[0] << ',' << s.direction[1] << ',' << s.boundary_fugacity[0] << ','
        << s.boundary_fugacity[1] << ',' << s.critical_density[0] << ','
        << s.critical_density[1] << '\n';
  }
}

}  // namespace zrp
