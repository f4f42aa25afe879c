#include "zrp/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "zrp/errors.hpp"
#include "zrp/numerics.hpp"
#include "zrp/random.hpp"

namespace zrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (m == -kInf) return -kInf;
  numerics::CompensatedSum s;
  for (double x : v) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

// Number of compositions of `mass` into `sites` parts, as a double (for guards).
double compositions_estimate(double mass, double sites) {
  if (sites == 0) return mass == 0 ? 1.0 : 0.0;
  return std::exp(std::lgamma(mass + sites) - std::lgamma(mass + 1) - std::lgamma(sites));
}

}  // namespace

// ---------------------------------------------------------------- Torus

Torus::Torus(Count side, int dimension) : side_(side), dimension_(dimension), sites_(1) {
  if (side < 1) throw DomainError("lattice side must be at least 1");
  if (dimension < 1 || dimension > 3) throw DomainError("dimension must be 1, 2 or 3");
  for (int j = 0; j < dimension; ++j) sites_ *= side;
}

std::size_t Torus::neighbour(std::size_t x, int axis, int direction) const {
  std::size_t stride = 1;
  for (int j = 0; j < axis; ++j) stride *= side_;
  const std::size_t coord = (x / stride) % side_;
  const std::size_t moved = direction == 0 ? (coord + 1) % side_ : (coord + side_ - 1) % side_;
  return x + (moved - coord) * stride;
}

// ---------------------------------------------------------------- StateSpace

std::size_t StateSpace::count(Count side, int dimension, Counts totals) {
  const Torus torus(side, dimension);
  const double sites = static_cast<double>(torus.sites());
  const double estimate =
      compositions_estimate(totals.k1, sites) * compositions_estimate(totals.k2, sites);
  if (!(estimate < 1e18)) return SIZE_MAX;
  return static_cast<std::size_t>(std::llround(estimate));
}

StateSpace::StateSpace(Count side, int dimension, Counts totals, std::size_t limit)
    : torus_(side, dimension), totals_(totals) {
  const std::size_t estimate = count(side, dimension, totals);
  if (estimate > limit) {
    throw FeasibilityError("state space M_{N,K} has " +
                           (estimate == SIZE_MAX ? std::string("too many")
                                                 : std::to_string(estimate)) +
                           " states, above the enumeration limit " + std::to_string(limit));
  }
  const Count max_mass = std::max(totals.k1, totals.k2);
  const std::size_t sites = torus_.sites();
  comp_.assign(max_mass + 1, std::vector<std::size_t>(sites + 1, 0));
  for (Count m = 0; m <= max_mass; ++m) {
    comp_[m][0] = m == 0 ? 1 : 0;
    for (std::size_t s = 1; s <= sites; ++s) {
      // C(m, s) = Σ_{v ≤ m} C(m − v, s − 1)  ⇔  C(m, s) = C(m, s−1) + C(m−1, s).
      comp_[m][s] = comp_[m][s - 1] + (m > 0 ? comp_[m - 1][s] : 0);
    }
  }
  count2_ = comp_[totals.k2][sites];
  size_ = comp_[totals.k1][sites] * count2_;
}

std::size_t StateSpace::compositions(Count mass, std::size_t sites) const {
  return comp_[mass][sites];
}

std::size_t StateSpace::rank(std::span<const Counts> eta, int species) const {
  const std::size_t sites = torus_.sites();
  Count remaining = totals_[species];
  std::size_t r = 0;
  for (std::size_t x = 0; x + 1 < sites; ++x) {
    const Count c = eta[x][species];
    for (Count v = 0; v < c; ++v) r += compositions(remaining - v, sites - x - 1);
    remaining -= c;
  }
  return r;
}

void StateSpace::unrank(std::size_t r, int species, std::vector<Counts>& eta) const {
  const std::size_t sites = torus_.sites();
  Count remaining = totals_[species];
  for (std::size_t x = 0; x < sites; ++x) {
    Count v = 0;
    if (x + 1 < sites) {
      while (r >= compositions(remaining - v, sites - x - 1)) {
        r -= compositions(remaining - v, sites - x - 1);
        ++v;
      }
    } else {
      v = remaining;
    }
    (species == 0 ? eta[x].k1 : eta[x].k2) = v;
    remaining -= v;
  }
}

void StateSpace::decode(std::size_t index, std::vector<Counts>& eta) const {
  if (index >= size_) throw DomainError("state index out of range");
  eta.assign(torus_.sites(), Counts{});
  unrank(index / count2_, 0, eta);
  unrank(index % count2_, 1, eta);
}

std::size_t StateSpace::encode(std::span<const Counts> eta) const {
  if (eta.size() != torus_.sites()) throw DomainError("configuration has the wrong site count");
  Count t1 = 0, t2 = 0;
  for (const auto& k : eta) {
    t1 += k.k1;
    t2 += k.k2;
  }
  if (t1 != totals_.k1 || t2 != totals_.k2) {
    throw DomainError("configuration does not belong to M_{N,K}");
  }
  return rank(eta, 0) * count2_ + rank(eta, 1);
}

bool StateSpace::operator==(const StateSpace& other) const {
  return torus_.side() == other.torus_.side() &&
         torus_.dimension() == other.torus_.dimension() && totals_ == other.totals_;
}

// ---------------------------------------------------------------- DistributionTable

nlohmann::json DistributionTable::to_json() const {
  nlohmann::json j;
  j["N"] = space->torus().side();
  j["d"] = space->torus().dimension();
  j["K"] = {space->totals().k1, space->totals().k2};
  j["probabilities"] = probabilities;
  return j;
}

DistributionTable DistributionTable::from_json(const nlohmann::json& j) {
  DistributionTable t;
  const auto side = j.at("N").get<Count>();
  const int d = j.value("d", 1);
  const auto k = j.at("K").get<std::vector<Count>>();
  if (k.size() != 2) throw DomainError("K must have two entries");
  t.space = std::make_shared<StateSpace>(side, d, Counts{k[0], k[1]});
  t.probabilities = j.at("probabilities").get<std::vector<double>>();
  if (t.probabilities.size() != t.space->size()) {
    throw DomainError("probability vector does not match |M_{N,K}|");
  }
  return t;
}

void DistributionTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json().dump(1) << '\n';
}

DistributionTable DistributionTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("distribution table not found: " + path.string());
  return from_json(nlohmann::json::parse(in));
}

double DistributionTable::total_variation(const DistributionTable& other) const {
  if (!(*space == *other.space)) throw DomainError("distribution tables index different spaces");
  numerics::CompensatedSum s;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    s.add(std::abs(probabilities[i] - other.probabilities[i]));
  }
  return 0.5 * s.value();
}

// ---------------------------------------------------------------- Generator

Generator::Generator(const JumpRateSpec& rate, std::shared_ptr<const StateSpace> space)
    : space_(std::move(space)) {
  const std::size_t n = space_->size();
  const Torus& torus = space_->torus();
  const int d = torus.dimension();
  const double kernel = 1.0 / (2.0 * d);
  row_.reserve(n + 1);
  row_.push_back(0);
  exit_.assign(n, 0.0);
  std::vector<Counts> eta;
  std::vector<std::pair<std::size_t, double>> entries;
  for (std::size_t i = 0; i < n; ++i) {
    space_->decode(i, eta);
    entries.clear();
    for (std::size_t x = 0; x < eta.size(); ++x) {
      const Counts here = eta[x];
      if (here.total() == 0) continue;
      const RatePair g = rate(here);
      for (int species = 0; species < 2; ++species) {
        if (here[species] == 0 || g[species] == 0.0) continue;
        for (int axis = 0; axis < d; ++axis) {
          for (int dir = 0; dir < 2; ++dir) {
            const std::size_t y = torus.neighbour(x, axis, dir);
            if (y == x) continue;
            auto& from = species == 0 ? eta[x].k1 : eta[x].k2;
            auto& to = species == 0 ? eta[y].k1 : eta[y].k2;
            --from;
            ++to;
            entries.emplace_back(space_->encode(eta), g[species] * kernel);
            ++from;
            --to;
          }
        }
      }
    }
    std::sort(entries.begin(), entries.end());
    for (std::size_t e = 0; e < entries.size();) {
      std::size_t f = e;
      double sum = 0.0;
      while (f < entries.size() && entries[f].first == entries[e].first) sum += entries[f++].second;
      col_.push_back(entries[e].first);
      rate_.push_back(sum);
      exit_[i] += sum;
      e = f;
    }
    row_.push_back(col_.size());
  }
}

double Generator::max_exit_rate() const {
  return exit_.empty() ? 0.0 : *std::max_element(exit_.begin(), exit_.end());
}

void Generator::apply_forward(std::span<const double> mu, std::span<double> out) const {
  for (std::size_t i = 0; i < exit_.size(); ++i) out[i] = -mu[i] * exit_[i];
  for (std::size_t i = 0; i < exit_.size(); ++i) {
    const double m = mu[i];
    if (m == 0.0) continue;
    for (std::size_t e = row_[i]; e < row_[i + 1]; ++e) out[col_[e]] += m * rate_[e];
  }
}

void Generator::apply(std::span<const double> f, std::span<double> out) const {
  for (std::size_t i = 0; i < exit_.size(); ++i) {
    double acc = 0.0;
    for (std::size_t e = row_[i]; e < row_[i + 1]; ++e) acc += rate_[e] * (f[col_[e]] - f[i]);
    out[i] = acc;
  }
}

// ---------------------------------------------------------------- canonical ensemble

namespace {

std::vector<double> canonical_log_weights(const Thermodynamics& thermo, const StateSpace& space) {
  std::vector<double> lw(space.size());
  std::vector<Counts> eta;
  for (std::size_t i = 0; i < space.size(); ++i) {
    space.decode(i, eta);
    double acc = 0.0;
    for (const auto& k : eta) acc -= thermo.log_g_factorial(k);
    lw[i] = acc;
  }
  return lw;
}

}  // namespace

double log_canonical_normaliser(const Thermodynamics& thermo, const StateSpace& space) {
  return log_sum_exp(canonical_log_weights(thermo, space));
}

DistributionTable canonical_measure(const Thermodynamics& thermo, Count side, int dimension,
                                    Counts totals, std::size_t limit) {
  DistributionTable t;
  t.space = std::make_shared<StateSpace>(side, dimension, totals, limit);
  auto lw = canonical_log_weights(thermo, *t.space);
  const double log_w = log_sum_exp(lw);
  for (double& x : lw) x = std::exp(x - log_w);
  t.probabilities = std::move(lw);
  return t;
}

double relative_entropy(const DistributionTable& mu, const DistributionTable& nu) {
  if (!(*mu.space == *nu.space) || mu.probabilities.size() != nu.probabilities.size()) {
    throw DomainError("relative_entropy: distributions index different state spaces");
  }
  numerics::CompensatedSum s;
  for (std::size_t i = 0; i < mu.probabilities.size(); ++i) {
    const double p = mu.probabilities[i];
    if (p == 0.0) continue;
    const double q = nu.probabilities[i];
    if (q == 0.0) return kInf;
    s.add(p * std::log(p / q));
  }
  return std::max(0.0, s.value());
}

double canonical_vs_product_entropy(const Thermodynamics& thermo, const StateSpace& space,
                                    Vec2 fugacity) {
  const Counts k = space.totals();
  for (int i = 0; i < 2; ++i) {
    if (k[i] > 0 && fugacity[i] == 0.0) return kInf;
  }
  const double log_z = thermo.partition_function(fugacity).log_z;
  const double sites = static_cast<double>(space.torus().sites());
  return sites * log_z - numerics::xlogy(k.k1, fugacity[0]) -
         numerics::xlogy(k.k2, fugacity[1]) - log_canonical_normaliser(thermo, space);
}

Counts particle_numbers(Vec2 rho, Count side, int dimension) {
  const double sites = static_cast<double>(Torus(side, dimension).sites());
  Counts k;
  for (int i = 0; i < 2; ++i) {
    Count n = 0;
    if (rho[i] > 0.0) n = std::max<Count>(1, static_cast<Count>(std::llround(rho[i] * sites)));
    (i == 0 ? k.k1 : k.k2) = n;
  }
  return k;
}

std::vector<EquivalencePoint> equivalence_of_ensembles_trace(const Thermodynamics& thermo,
                                                             Vec2 rho,
                                                             std::span<const Count> sides,
                                                             int dimension) {
  const Vec2 phi = thermo.extended_mean_jump_rate(rho);
  std::vector<EquivalencePoint> out;
  for (Count side : sides) {
    EquivalencePoint p;
    p.side = side;
    p.totals = particle_numbers(rho, side, dimension);
    const StateSpace space(side, dimension, p.totals);
    p.value = canonical_vs_product_entropy(thermo, space, phi) /
              static_cast<double>(space.torus().sites());
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------- master equation

namespace {

// v ← v e^{t Q} by uniformisation.
void evolve_in_place(const Generator& generator, std::vector<double>& v, double t) {
  const double lambda = generator.max_exit_rate();
  if (t <= 0.0 || lambda == 0.0) return;
  const std::size_t n = v.size();
  const double total = lambda * t;
  const auto chunks = static_cast<std::size_t>(std::ceil(total / 20.0));
  const double a = total / static_cast<double>(chunks);
  std::vector<double> term(n), next(n), acc(n), q(n);
  for (std::size_t c = 0; c < chunks; ++c) {
    term = v;
    double w = std::exp(-a);
    double cum = w;
    for (std::size_t i = 0; i < n; ++i) acc[i] = w * term[i];
    for (int k = 1; cum < 1.0 - 1e-12 || k <= a; ++k) {
      generator.apply_forward(term, q);
      for (std::size_t i = 0; i < n; ++i) next[i] = term[i] + q[i] / lambda;
      term.swap(next);
      w *= a / k;
      cum += w;
      for (std::size_t i = 0; i < n; ++i) acc[i] += w * term[i];
      if (k > 100000) throw Error("uniformisation failed to converge");
    }
    numerics::CompensatedSum s;
    for (double x : acc) s.add(x);
    const double norm = s.value();
    for (std::size_t i = 0; i < n; ++i) v[i] = std::max(0.0, acc[i] / norm);
  }
}

double scaled_time(const Generator& generator, double t, TimeScale scale) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and non-negative");
  if (scale == TimeScale::raw) return t;
  const double side = generator.space()->torus().side();
  return t * side * side;
}

}  // namespace

DistributionTable master_equation_evolve(const Generator& generator,
                                         const DistributionTable& mu0, double t,
                                         TimeScale scale) {
  if (!(*mu0.space == *generator.space())) {
    throw DomainError("initial law and generator index different state spaces");
  }
  DistributionTable out = mu0;
  evolve_in_place(generator, out.probabilities, scaled_time(generator, t, scale));
  return out;
}

std::vector<double> entropy_production_trace(const Generator& generator,
                                             const DistributionTable& mu0,
                                             const DistributionTable& reference,
                                             std::span<const double> times, TimeScale scale) {
  std::vector<double> out;
  DistributionTable mu = mu0;
  double now = 0.0;
  for (double t : times) {
    if (t < now) throw DomainError("entropy_production_trace needs a non-decreasing time grid");
    mu = master_equation_evolve(generator, mu, t - now, scale);
    now = t;
    out.push_back(relative_entropy(mu, reference));
  }
  return out;
}

double dirichlet_form(const Generator& generator, std::span<const double> f,
                      const DistributionTable& reference) {
  std::vector<double> lf(f.size());
  generator.apply(f, lf);
  numerics::CompensatedSum s;
  for (std::size_t i = 0; i < f.size(); ++i) s.add(-reference.probabilities[i] * f[i] * lf[i]);
  return s.value();
}

double stationarity_residual(const Generator& generator, const DistributionTable& nu) {
  std::vector<double> q(nu.probabilities.size());
  generator.apply_forward(nu.probabilities, q);
  double worst = 0.0;
  for (double x : q) worst = std::max(worst, std::abs(x));
  return worst;
}

// ---------------------------------------------------------------- one-site marginal

OneSiteMarginal::OneSiteMarginal(const Thermodynamics& thermo, Vec2 fugacity, double tail_tol)
    : thermo_(&thermo), fugacity_(fugacity) {
  log_z_ = thermo.partition_function(fugacity).log_z;
  const Count cap = thermo.species_blind() ? thermo.species_blind()->max_k()
                                           : thermo.options().shell_cap;
  numerics::CompensatedSum cum;
  std::vector<double> terms;
  double prev = kInf;
  for (Count n = 0;; ++n) {
    terms.resize(n + 1);
    for (Count j = 0; j <= n; ++j) terms[j] = shell_term(n, j);
    const double p = std::exp(log_sum_exp(terms) - log_z_);
    shell_prob_.push_back(p);
    cum.add(p);
    const double tail = 1.0 - cum.value();
    // The second test guards against Z carrying a relative error near tail_tol.
    if (tail < tail_tol || (p < 1e-4 * tail_tol && p <= prev) || n >= cap) break;
    prev = p;
  }
  const double total = cum.value();
  tail_mass_ = std::max(0.0, 1.0 - total);
  shell_cdf_.resize(shell_prob_.size());
  double run = 0.0;
  for (std::size_t n = 0; n < shell_prob_.size(); ++n) {
    shell_prob_[n] /= total;
    run += shell_prob_[n];
    shell_cdf_[n] = run;
  }
  shell_cdf_.back() = 1.0;
}

OneSiteMarginal OneSiteMarginal::from_density(const Thermodynamics& thermo, Vec2 rho,
                                              double tail_tol) {
  return OneSiteMarginal(thermo, thermo.mean_jump_rate(rho), tail_tol);
}

double OneSiteMarginal::shell_term(Count n, Count k1) const {
  const Count k2 = n - k1;
  if ((k1 > 0 && fugacity_[0] == 0.0) || (k2 > 0 && fugacity_[1] == 0.0)) return -kInf;
  return numerics::xlogy(k1, fugacity_[0]) + numerics::xlogy(k2, fugacity_[1]) -
         thermo_->log_g_factorial({k1, k2});
}

double OneSiteMarginal::probability(Counts k) const {
  const Count n = k.total();
  if (n > max_shell()) return 0.0;
  return std::exp(shell_term(n, k.k1) - log_z_) / (1.0 - tail_mass_);
}

double OneSiteMarginal::expectation(const std::function<double(Counts)>& f) const {
  numerics::CompensatedSum s;
  const double norm = 1.0 - tail_mass_;
  for (Count n = 0; n <= max_shell(); ++n) {
    for (Count j = 0; j <= n; ++j) {
      const double p = std::exp(shell_term(n, j) - log_z_) / norm;
      if (p > 0.0) s.add(p * f({j, n - j}));
    }
  }
  return s.value();
}

Counts OneSiteMarginal::sample(std::mt19937_64& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(shell_cdf_.begin(), shell_cdf_.end(), u);
  const Count n = static_cast<Count>(std::min<std::ptrdiff_t>(
      it - shell_cdf_.begin(), static_cast<std::ptrdiff_t>(shell_cdf_.size() - 1)));
  if (n == 0) return {};
  if (fugacity_[0] == 0.0) return {0, n};
  if (fugacity_[1] == 0.0) return {n, 0};
  // k1 | n by inverse CDF over the shell.
  std::vector<double> w(n + 1);
  for (Count j = 0; j <= n; ++j) w[j] = shell_term(n, j);
  const double m = *std::max_element(w.begin(), w.end());
  double total = 0.0;
  for (double& x : w) total += (x = std::exp(x - m));
  const double v = uniform01(rng) * total;
  double run = 0.0;
  for (Count j = 0; j <= n; ++j) {
    run += w[j];
    if (v < run) return {j, n - j};
  }
  return {n, 0};
}

// ---------------------------------------------------------------- slowly varying product

SlowlyVaryingProduct::SlowlyVaryingProduct(const Thermodynamics& thermo, const Profile& profile,
                                           Count side, int dimension, double tail_tol)
    : torus_(side, dimension) {
  marginals_.reserve(side);
  for (Count i = 0; i < side; ++i) {
    const double u = static_cast<double>(i) / side;
    const Vec2 rho = profile(u);
    if (!(rho.minCoeff() >= 0.0) || !thermo.is_subcritical(rho)) {
      throw CriticalityError("profile value (" + std::to_string(rho[0]) + "," +
                             std::to_string(rho[1]) + ") at u=" + std::to_string(u) +
                             " is not strictly sub-critical");
    }
    marginals_.push_back(OneSiteMarginal::from_density(thermo, rho, tail_tol));
  }
  site_marginal_.resize(torus_.sites());
  for (std::size_t x = 0; x < torus_.sites(); ++x) site_marginal_[x] = x % side;
}

const OneSiteMarginal& SlowlyVaryingProduct::marginal(std::size_t site) const {
  return marginals_.at(site_marginal_.at(site));
}

std::vector<Counts> SlowlyVaryingProduct::sample(std::uint64_t seed,
                                                 std::uint64_t replica) const {
  std::vector<Counts> eta(torus_.sites());
  for (std::size_t x = 0; x < eta.size(); ++x) {
    auto rng = make_stream(seed, replica, x);
    eta[x] = marginals_[site_marginal_[x]].sample(rng);
  }
  return eta;
}

}  // namespace zrp
