#include "zrp/pde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <string>

#include "zrp/errors.hpp"
#include "zrp/numerics.hpp"

namespace zrp {

namespace {

constexpr const char* kSchemeSystem = "explicit-conservative-system";
constexpr const char* kSchemeScalar = "explicit-conservative-scalar";
constexpr const char* kSchemeDecoupled = "species-blind-decoupled";

std::size_t grid_points(Count M, int d) {
  if (M < 3) throw DomainError("PDE grid needs M >= 3");
  if (d < 1 || d > 3) throw DomainError("PDE dimension must be 1, 2 or 3");
  std::size_t n = 1;
  for (int a = 0; a < d; ++a) n *= M;
  return n;
}

double cell_volume(Count M, int d) { return std::pow(1.0 / M, d); }

/// out = Δ_h f with the (2d+1)-point periodic stencil.
void laplacian(Count M, int d, const std::vector<double>& f, std::vector<double>& out) {
  const std::size_t n = f.size();
  const double inv_h2 = static_cast<double>(M) * M;
  out.assign(n, 0.0);
  if (d == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const double left = f[i == 0 ? n - 1 : i - 1];
      const double right = f[i + 1 == n ? 0 : i + 1];
      out[i] = (left - 2.0 * f[i] + right) * inv_h2;
    }
    return;
  }
  std::size_t stride = 1;
  for (int a = 0; a < d; ++a, stride *= M) {  // first coordinate innermost, as in Torus
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = (i / stride) % M;
      const std::size_t lo = c == 0 ? i + (M - 1) * stride : i - stride;
      const std::size_t hi = c + 1 == M ? i - (M - 1) * stride : i + stride;
      out[i] += (f[lo] - 2.0 * f[i] + f[hi]) * inv_h2;
    }
  }
}

void check_output_times(std::span<const double> times) {
  if (times.empty()) throw DomainError("empty output time grid");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i])) {
      throw DomainError("output times must be finite and non-negative");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw DomainError("output times must be strictly increasing");
    }
  }
}

[[noreturn]] void abort_at(double t, std::size_t index, const std::string& what) {
  throw CriticalityError("PDE solve left the sub-critical region at t=" + std::to_string(t) +
                         ", grid point " + std::to_string(index) + ": " + what);
}

/// Drives the explicit scheme: `bound()` returns the current CFL bound Λ,
/// `advance(dt)` performs one step and `store(t, dt)` records an output.
std::size_t march(std::span<const double> output_times, const PdeOptions& options,
                  const std::function<double()>& bound, const std::function<void(double)>& advance,
                  const std::function<void(double, double)>& store) {
  check_output_times(output_times);
  if (!(options.safety > 0.0) || options.safety > 1.0) {
    throw DomainError("CFL safety factor must lie in (0, 1]");
  }
  const std::size_t refresh = std::max<std::size_t>(options.cfl_refresh, 1);
  const double h = 1.0 / options.M;
  double t = 0.0;
  double dt_regular = 0.0;
  std::size_t steps = 0;
  for (double target : output_times) {
    while (t < target) {
      if (steps % refresh == 0) {
        const double lambda = bound();
        if (!std::isfinite(lambda)) abort_at(t, 0, "non-finite mobility bound");
        dt_regular = lambda > 0.0 ? options.safety * h * h / (2.0 * options.dimension * lambda)
                                  : target - t;
      }
      const bool lands = t + dt_regular >= target;
      const double dt = lands ? target - t : dt_regular;
      advance(dt);
      t = lands ? target : t + dt;
      ++steps;
    }
    store(target, dt_regular);
  }
  return steps;
}

double max_component_sum(const PdeField& field) {
  double m = 0.0;
  for (std::size_t i = 0; i < field.points(); ++i) m = std::max(m, field.rho1[i] + field.rho2[i]);
  return m;
}

/// Φ̂ range for non-condensing rates: the maximum principle keeps the sum
/// below its initial maximum, so a margin above it suffices.
double table_range(const OneSpeciesThermo& thermo, double initial_max) {
  if (thermo.condensing()) return thermo.critical_density();
  return 1.1 * initial_max + 1e-3;
}

void validate_initial(const PdeField& f) {
  const std::size_t n = grid_points(f.M, f.dimension);
  if (f.rho1.size() != n || f.rho2.size() != n) {
    throw DomainError("initial field size does not match the grid");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(f.rho1[i]) || !std::isfinite(f.rho2[i])) {
      throw DomainError("initial field is not finite");
    }
    if (f.rho1[i] < 0.0 || f.rho2[i] < 0.0) throw DomainError("initial density is negative");
  }
}

/// Pointwise Φ and CFL bound of a species-blind rate from a Φ̂ table.
class SpeciesBlindFlux {
 public:
  SpeciesBlindFlux(const MeanJumpRateTable& table, double tolerance)
      : table_(table), tolerance_(tolerance) {}

  double sum(double t, std::size_t i, double r1, double r2) const {
    if (!std::isfinite(r1) || !std::isfinite(r2)) abort_at(t, i, "non-finite density");
    if (r1 < -tolerance_ || r2 < -tolerance_) abort_at(t, i, "negative density");
    const double s = r1 + r2;
    if (s > table_.s_max() + tolerance_) {
      if (table_.condensing()) abort_at(t, i, "density sum beyond the critical density");
      throw Error("density sum " + std::to_string(s) + " left the tabulated range at t=" +
                  std::to_string(t));
    }
    return s;
  }

  void flux(double t, const PdeField& f, std::vector<double>& p1, std::vector<double>& p2) const {
    const std::size_t n = f.points();
    p1.resize(n);
    p2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = table_.coefficient(sum(t, i, f.rho1[i], f.rho2[i]));
      p1[i] = a * f.rho1[i];
      p2[i] = a * f.rho2[i];
    }
  }

  /// Grid max of the Frobenius norm of DΦ = a I + ρ a'(s) 1^T.
  double bound(const PdeField& f) const {
    double lambda = 0.0;
    for (std::size_t i = 0; i < f.points(); ++i) {
      const double s = std::clamp(f.rho1[i] + f.rho2[i], 0.0, table_.s_max());
      const double a = table_.coefficient(s);
      const double da = table_.coefficient_derivative(s);
      const double r1 = f.rho1[i];
      const double r2 = f.rho2[i];
      const double j11 = a + r1 * da;
      const double j12 = r1 * da;
      const double j21 = r2 * da;
      const double j22 = a + r2 * da;
      lambda = std::max(lambda, std::sqrt(j11 * j11 + j12 * j12 + j21 * j21 + j22 * j22));
    }
    return lambda;
  }

 private:
  const MeanJumpRateTable& table_;
  double tolerance_;
};

}  // namespace

InvariantRegionReport invariant_region_monitor(std::span<const PdeField> trajectory,
                                               double critical_density);

namespace {

/// The monitor over the initial field followed by the stored outputs.
InvariantRegionReport monitor_from_initial(const PdeField& initial,
                                           const std::vector<PdeField>& outputs,
                                           double critical_density) {
  std::vector<PdeField> all;
  all.reserve(outputs.size() + 1);
  if (outputs.empty() || outputs.front().t > 0.0) {
    all.push_back(initial);
    all.back().t = 0.0;
  }
  all.insert(all.end(), outputs.begin(), outputs.end());
  return invariant_region_monitor(all, critical_density);
}

}  // namespace

// ---------------------------------------------------------------------------
// Fields

double PdeField::mass(int species) const {
  numerics::CompensatedSum sum;
  for (double v : species == 0 ? rho1 : rho2) sum.add(v);
  return sum.value() * cell_volume(M, dimension);
}

PdeField PdeField::from_profile(const Profile& profile, Count M, int dimension) {
  PdeField f;
  f.M = M;
  f.dimension = dimension;
  const std::size_t n = grid_points(M, dimension);
  f.rho1.resize(n);
  f.rho2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 r = profile(static_cast<double>(i % M) / M);
    f.rho1[i] = r[0];
    f.rho2[i] = r[1];
  }
  return f;
}

double ScalarField::mass() const {
  numerics::CompensatedSum sum;
  for (double v : rho) sum.add(v);
  return sum.value() * cell_volume(M, dimension);
}

nlohmann::json InvariantRegionReport::to_json() const {
  nlohmann::json j{{"min_rho1", min_rho1},
                   {"min_rho2", min_rho2},
                   {"max_sum", max_sum},
                   {"initial_min_rho1", initial_min_rho1},
                   {"initial_min_rho2", initial_min_rho2},
                   {"initial_max_sum", initial_max_sum},
                   {"breach", breach}};
  if (breach) {
    j["breach_time"] = breach_time;
    j["breach_index"] = breach_index;
    j["breach_reason"] = breach_reason;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Φ̂ table

MeanJumpRateTable::MeanJumpRateTable(const OneSpeciesThermo& thermo, double s_max,
                                     std::size_t nodes) {
  condensing_ = thermo.condensing();
  s_max_ = condensing_ ? thermo.critical_density() : s_max;
  if (!(s_max_ > 0.0) || !std::isfinite(s_max_)) throw DomainError("invalid Φ̂ table range");
  nodes = std::max<std::size_t>(nodes, 17);

  // Fugacity range [0, φ_max] with R̂(φ_max) >= s_max.
  const double phi_c = thermo.critical_fugacity();
  double phi_max = phi_c;
  if (!condensing_) {
    if (std::isfinite(phi_c)) {
      double gap = 0.5;
      phi_max = phi_c * (1.0 - gap);
      while (thermo.density(phi_max) < s_max_) {
        gap *= 0.5;
        if (gap < 1e-15) throw DomainError("Φ̂ table range not reachable below φ_c");
        phi_max = phi_c * (1.0 - gap);
      }
    } else {
      phi_max = 1.0;
      while (thermo.density(phi_max) < s_max_) phi_max *= 2.0;
    }
  }

  const double slope_at_zero = std::exp(thermo.log_factorial(1));  // Φ̂'(0) = ĝ(1)
  struct Node {
    double phi, rho, slope;
  };
  auto evaluate = [&](double phi) {
    if (phi == 0.0) return Node{0.0, 0.0, slope_at_zero};
    const auto p = thermo.partition(phi);
    const double slope = std::isfinite(p.variance) && p.variance > 0.0 ? phi / p.variance : 0.0;
    return Node{phi, p.density, slope};
  };

  // Uniform in φ, then bisect intervals until the ρ spacing is below target.
  std::vector<Node> grid;
  const std::size_t coarse = 65;
  for (std::size_t j = 0; j < coarse; ++j) grid.push_back(evaluate(phi_max * j / (coarse - 1)));
  const double target = s_max_ / static_cast<double>(nodes - 1);
  for (int pass = 0; pass < 40; ++pass) {
    std::vector<Node> refined{grid.front()};
    bool changed = false;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      if (grid[j].rho - grid[j - 1].rho > target && grid[j].phi - grid[j - 1].phi > 1e-15) {
        refined.push_back(evaluate(0.5 * (grid[j - 1].phi + grid[j].phi)));
        changed = true;
      }
      refined.push_back(grid[j]);
    }
    grid = std::move(refined);
    if (!changed) break;
  }
  if (condensing_) grid.back().rho = s_max_;  // the series value at φ_c defines ρ̂_c

  for (const Node& node : grid) {
    if (!rho_.empty() && !(node.rho > rho_.back())) continue;
    rho_.push_back(node.rho);
    phi_.push_back(node.phi);
    slope_.push_back(node.slope);
  }
  if (!condensing_) s_max_ = std::min(s_max_, rho_.back());
}

std::size_t MeanJumpRateTable::locate(double s) const {
  const auto it = std::upper_bound(rho_.begin(), rho_.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - rho_.begin());
  return std::clamp<std::size_t>(j, 1, rho_.size() - 1) - 1;
}

double MeanJumpRateTable::value(double s) const {
  s = std::clamp(s, 0.0, s_max_);
  const std::size_t j = locate(s);
  const double h = rho_[j + 1] - rho_[j];
  const double x = (s - rho_[j]) / h;
  const double h00 = (1 + 2 * x) * (1 - x) * (1 - x);
  const double h10 = x * (1 - x) * (1 - x);
  const double h01 = x * x * (3 - 2 * x);
  const double h11 = x * x * (x - 1);
  return h00 * phi_[j] + h10 * h * slope_[j] + h01 * phi_[j + 1] + h11 * h * slope_[j + 1];
}

double MeanJumpRateTable::derivative(double s) const {
  s = std::clamp(s, 0.0, s_max_);
  const std::size_t j = locate(s);
  const double h = rho_[j + 1] - rho_[j];
  const double x = (s - rho_[j]) / h;
  const double d00 = 6 * x * (x - 1) / h;
  const double d10 = (1 - x) * (1 - 3 * x);
  const double d01 = -d00;
  const double d11 = x * (3 * x - 2);
  return d00 * phi_[j] + d10 * slope_[j] + d01 * phi_[j + 1] + d11 * slope_[j + 1];
}

double MeanJumpRateTable::coefficient(double s) const {
  if (s <= 1e-12 * s_max_) return slope_.front();
  return value(s) / s;
}

double MeanJumpRateTable::coefficient_derivative(double s) const {
  if (s <= 1e-6 * s_max_) {
    // a(s) = Φ̂'(0) + Φ̂''(0) s / 2 + ...; the first interval's slope change.
    return 0.5 * (slope_[1] - slope_[0]) / rho_[1];
  }
  s = std::min(s, s_max_);
  return (derivative(s) * s - value(s)) / (s * s);
}

// ---------------------------------------------------------------------------
// Solvers

SystemSolution solve_system(const Thermodynamics& thermo, const PdeField& initial,
                            std::span<const double> output_times, const PdeOptions& options_in) {
  validate_initial(initial);
  PdeOptions options = options_in;
  options.M = initial.M;
  options.dimension = initial.dimension;
  const double tol = options.breach_tolerance;

  PdeField state = initial;
  state.t = 0.0;
  state.scheme = kSchemeSystem;
  std::vector<double> p1, p2, l1, l2;
  SystemSolution out;
  double now = 0.0;

  std::function<void(double, const PdeField&)> flux;
  std::function<double(const PdeField&)> bound;
  double critical_density = std::numeric_limits<double>::infinity();
  std::unique_ptr<MeanJumpRateTable> table;
  std::unique_ptr<SpeciesBlindFlux> blind;

  if (const OneSpeciesThermo* base = thermo.species_blind()) {
    critical_density = base->critical_density();
    const double s0 = max_component_sum(initial);
    if (base->condensing() && !(s0 < critical_density)) {
      throw CriticalityError("initial data is not sub-critical (max |rho|_1 = " +
                             std::to_string(s0) + ")");
    }
    table = std::make_unique<MeanJumpRateTable>(*base, table_range(*base, s0));
    blind = std::make_unique<SpeciesBlindFlux>(*table, tol);
    flux = [&](double t, const PdeField& f) { blind->flux(t, f, p1, p2); };
    bound = [&](const PdeField& f) { return blind->bound(f); };
  } else {
    for (std::size_t i = 0; i < initial.points(); ++i) {
      if (!thermo.is_subcritical({initial.rho1[i], initial.rho2[i]})) {
        throw CriticalityError("initial data is not sub-critical at grid point " +
                               std::to_string(i));
      }
    }
    flux = [&](double t, const PdeField& f) {
      const std::size_t n = f.points();
      p1.resize(n);
      p2.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2 r{f.rho1[i], f.rho2[i]};
        if (!r.allFinite()) abort_at(t, i, "non-finite density");
        if (r.minCoeff() < -tol) abort_at(t, i, "negative density");
        Vec2 phi;
        try {
          phi = thermo.mean_jump_rate(r.cwiseMax(0.0));
        } catch (const CriticalityError& e) {
          abort_at(t, i, e.what());
        }
        p1[i] = phi[0];
        p2[i] = phi[1];
      }
    };
    bound = [&](const PdeField& f) {
      double lambda = 0.0;
      for (std::size_t i = 0; i < f.points(); ++i) {
        const Vec2 r = Vec2{f.rho1[i], f.rho2[i]}.cwiseMax(0.0);
        lambda = std::max(lambda, thermo.mean_jump_rate_jacobian(r).norm());  // Frobenius
      }
      return lambda;
    };
  }

  out.steps = march(
      output_times, options, [&] { return bound(state); },
      [&](double dt) {
        flux(now, state);
        laplacian(options.M, options.dimension, p1, l1);
        laplacian(options.M, options.dimension, p2, l2);
        for (std::size_t i = 0; i < state.points(); ++i) {
          state.rho1[i] += dt * l1[i];
          state.rho2[i] += dt * l2[i];
        }
        now += dt;
      },
      [&](double t, double dt) {
        now = t;
        flux(t, state);  // validates the stored state
        state.t = t;
        state.dt = dt;
        out.trajectory.push_back(state);
      });
  out.report = monitor_from_initial(initial, out.trajectory, critical_density);
  return out;
}

namespace {

/// Shared scalar stage of solve_scalar and the decoupled route. `on_step`
/// receives the coefficient field a(ρ̂^n) and dt before ρ̂ is advanced. With
/// `linear_stage` the CFL bound also covers a, the diffusivity of the linear
/// equations (a exceeds Φ̂' where Φ̂ is concave).
std::size_t march_scalar(const OneSpeciesThermo& thermo, ScalarField& state,
                         std::span<const double> output_times, const PdeOptions& options,
                         bool linear_stage,
                         const std::function<void(const std::vector<double>&, double)>& on_step,
                         const std::function<void(double, double)>& store) {
  const std::size_t n = grid_points(state.M, state.dimension);
  if (state.rho.size() != n) throw DomainError("initial field size does not match the grid");
  double s0 = 0.0;
  for (double v : state.rho) {
    if (!std::isfinite(v)) throw DomainError("initial field is not finite");
    if (v < 0.0) throw DomainError("initial density is negative");
    s0 = std::max(s0, v);
  }
  if (thermo.condensing() && !(s0 < thermo.critical_density())) {
    throw CriticalityError("initial data is not sub-critical (max rho = " + std::to_string(s0) +
                           ")");
  }
  const MeanJumpRateTable table(thermo, table_range(thermo, s0));
  const double tol = options.breach_tolerance;
  std::vector<double> a(n), flux(n), lap;
  double now = 0.0;

  auto coefficients = [&](double t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = state.rho[i];
      if (!std::isfinite(s)) abort_at(t, i, "non-finite density");
      if (s < -tol) abort_at(t, i, "negative density");
      if (s > table.s_max() + tol) {
        if (table.condensing()) abort_at(t, i, "density beyond the critical density");
        throw Error("density " + std::to_string(s) + " left the tabulated range at t=" +
                    std::to_string(t));
      }
      a[i] = table.coefficient(s);
      flux[i] = s > 1e-12 * table.s_max() ? table.value(s) : a[i] * s;
    }
  };

  PdeOptions grid_options = options;
  grid_options.M = state.M;
  grid_options.dimension = state.dimension;
  return march(
      output_times, grid_options,
      [&] {
        double lambda = 0.0;
        for (double v : state.rho) {
          lambda = std::max(lambda, table.derivative(v));
          if (linear_stage) lambda = std::max(lambda, table.coefficient(std::max(v, 0.0)));
        }
        return lambda;
      },
      [&](double dt) {
        coefficients(now);
        if (on_step) on_step(a, dt);
        laplacian(state.M, state.dimension, flux, lap);
        for (std::size_t i = 0; i < n; ++i) state.rho[i] += dt * lap[i];
        now += dt;
      },
      [&](double t, double dt) {
        now = t;
        coefficients(t);
        state.t = t;
        state.dt = dt;
        store(t, dt);
      });
}

}  // namespace

ScalarSolution solve_scalar(const OneSpeciesThermo& thermo, const ScalarField& initial,
                            std::span<const double> output_times, const PdeOptions& options) {
  ScalarField state = initial;
  state.t = 0.0;
  state.scheme = kSchemeScalar;
  ScalarSolution out;
  out.steps = march_scalar(thermo, state, output_times, options, false, {},
                           [&](double, double) { out.trajectory.push_back(state); });
  return out;
}

SystemSolution solve_species_blind_decoupled(const OneSpeciesThermo& base, const PdeField& initial,
                                             std::span<const double> output_times,
                                             const PdeOptions& options) {
  validate_initial(initial);
  ScalarField sum;
  sum.scheme = kSchemeScalar;
  sum.M = initial.M;
  sum.dimension = initial.dimension;
  sum.rho.resize(initial.points());
  for (std::size_t i = 0; i < initial.points(); ++i) sum.rho[i] = initial.rho1[i] + initial.rho2[i];

  PdeField state = initial;
  state.t = 0.0;
  state.scheme = kSchemeDecoupled;
  std::vector<double> f1, f2, l1, l2;
  SystemSolution out;
  out.steps = march_scalar(
      base, sum, output_times, options, true,
      [&](const std::vector<double>& a, double dt) {
        const std::size_t n = a.size();
        f1.resize(n);
        f2.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          f1[i] = a[i] * state.rho1[i];
          f2[i] = a[i] * state.rho2[i];
        }
        laplacian(state.M, state.dimension, f1, l1);
        laplacian(state.M, state.dimension, f2, l2);
        for (std::size_t i = 0; i < n; ++i) {
          state.rho1[i] += dt * l1[i];
          state.rho2[i] += dt * l2[i];
        }
      },
      [&](double t, double dt) {
        state.t = t;
        state.dt = dt;
        out.trajectory.push_back(state);
        out.scalar_stage.push_back(sum);
      });
  out.report = monitor_from_initial(initial, out.trajectory, base.critical_density());
  return out;
}

InvariantRegionReport invariant_region_monitor(std::span<const PdeField> trajectory,
                                               double critical_density) {
  InvariantRegionReport r;
  if (trajectory.empty()) return r;
  const PdeField& first = trajectory.front();
  r.initial_min_rho1 = *std::min_element(first.rho1.begin(), first.rho1.end());
  r.initial_min_rho2 = *std::min_element(first.rho2.begin(), first.rho2.end());
  r.initial_max_sum = max_component_sum(first);
  const bool positive1 = r.initial_min_rho1 > 0.0;
  const bool positive2 = r.initial_min_rho2 > 0.0;

  auto flag = [&](double t, std::size_t i, const char* reason) {
    if (r.breach) return;
    r.breach = true;
    r.breach_time = t;
    r.breach_index = i;
    r.breach_reason = reason;
  };
  for (const PdeField& f : trajectory) {
    for (std::size_t i = 0; i < f.points(); ++i) {
      const double a = f.rho1[i];
      const double b = f.rho2[i];
      if (!std::isfinite(a) || !std::isfinite(b)) {
        flag(f.t, i, "non-finite value");
        continue;
      }
      r.min_rho1 = std::min(r.min_rho1, a);
      r.min_rho2 = std::min(r.min_rho2, b);
      r.max_sum = std::max(r.max_sum, a + b);
      if ((positive1 && a <= 0.0) || (positive2 && b <= 0.0) || a < 0.0 || b < 0.0) {
        flag(f.t, i, "non-positive component");
      }
      if (a + b >= critical_density) flag(f.t, i, "sum at or above the critical density");
    }
  }
  return r;
}

double interpolate_periodic(std::span<const double> values, double u) {
  const std::size_t m = values.size();
  if (m == 0) throw DomainError("cannot interpolate an empty field");
  double x = (u - std::floor(u)) * static_cast<double>(m);
  std::size_t i = static_cast<std::size_t>(x);
  if (i >= m) i = m - 1;
  const double w = x - static_cast<double>(i);
  return (1.0 - w) * values[i] + w * values[(i + 1) % m];
}

void write_pde_csv(std::span<const PdeField> trajectory, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "t,x,rho1,rho2\n";
  for (const PdeField& f : trajectory) {
    for (std::size_t i = 0; i < f.points(); ++i) {
      out << f.t << ',' << i << ',' << f.rho1[i] << ',' << f.rho2[i] << '\n';
    }
  }
}

void write_scalar_csv(std::span<const ScalarField> trajectory, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "t,x,rho\n";
  for (const ScalarField& f : trajectory) {
    for (std::size_t i = 0; i < f.points(); ++i) out << f.t << ',' << i << ',' << f.rho[i] << '\n';
  }
}

nlohmann::json pde_manifest(const std::string& scheme, const PdeOptions& options, double dt,
                            const std::string& rate_description) {
  return nlohmann::json{{"scheme", scheme},         {"M", options.M},
                        {"d", options.dimension},   {"dt", dt},
                        {"safety", options.safety}, {"cfl_refresh", options.cfl_refresh},
                        {"breach_tolerance", options.breach_tolerance},
                        {"rate", rate_description}};
}

}  // namespace zrp
