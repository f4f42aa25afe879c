#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "zrp/types.hpp"

namespace zrp {

/// One-species local jump rate ĝ with ĝ(0) = 0 and ĝ(k) > 0 for k >= 1.
class OneSpeciesRate {
 public:
  enum class Kind { linear, constant, evans, custom };

  static OneSpeciesRate linear();
  static OneSpeciesRate constant();
  /// ĝ(k) = 1 + b/k. Condensing for b > 2 with critical density 1/(b-2).
  static OneSpeciesRate evans(double b);
  static OneSpeciesRate custom(std::function<double(Count)> fn, double lipschitz, bool bounded,
                               std::string name = "custom");

  double operator()(Count k) const;

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  double lipschitz_bound() const { return lipschitz_; }
  bool bounded() const { return bounded_; }
  std::string describe() const;

 private:
  OneSpeciesRate(Kind kind, double parameter, double lipschitz, bool bounded)
      : kind_(kind), parameter_(parameter), lipschitz_(lipschitz), bounded_(bounded) {}

  Kind kind_;
  double parameter_ = 0.0;
  double lipschitz_ = 1.0;
  bool bounded_ = false;
  std::function<double(Count)> custom_;
  std::string name_;
};

struct RatePair {
  double g1 = 0.0;
  double g2 = 0.0;

  double operator[](int species) const { return species == 0 ? g1 : g2; }
};

/// Two-species local jump rate g = (g1, g2) with its Lipschitz constant g*.
///
/// Two families exist: species-blind rates g_i(k) = k_i h(|k|_1) built from a
/// one-species rate, and rates tabulated on a finite box {0..B}^2. Values are
/// immutable after construction and safe to share between threads.
class JumpRateSpec {
 public:
  struct SpeciesBlind {
    OneSpeciesRate base;
  };
  struct Tabulated {
    Count extent = 0;  // box is {0..extent}^2
    std::vector<RatePair> values;
  };

  static JumpRateSpec species_blind(OneSpeciesRate base);
  /// Table in row-major order over k1 (outer) and k2 (inner), (extent+1)^2 entries.
  static JumpRateSpec tabulated(Count extent, std::vector<RatePair> values);

  RatePair operator()(Counts k) const;
  double rate(int species, Counts k) const;

  double lipschitz_bound() const { return lipschitz_; }
  bool bounded() const { return bounded_; }
  /// Largest occupation per species that can be evaluated; nullopt when unlimited.
  std::optional<Count> box_extent() const;
  const OneSpeciesRate* species_blind_base() const;
  const Tabulated* table() const;
  /// One-species rate obtained by restricting to the axis of `species`.
  std::function<double(Count)> axis_rate(int species) const;
  std::string describe() const;

 private:
  using Family = std::variant<SpeciesBlind, Tabulated>;
  explicit JumpRateSpec(Family family);

  Family family_;
  double lipschitz_ = 0.0;
  bool bounded_ = false;
};

/// Same as JumpRateSpec::species_blind; g_i(k) = k_i ĝ(|k|_1)/|k|_1.
JumpRateSpec species_blind_rate(OneSpeciesRate base);

/// Loads a tabulated rate from CSV with header k1,k2,g1,g2. The box extent is
/// the largest k1 (and k2) present; every point of the box must be listed.
JumpRateSpec load_rate_table(const std::filesystem::path& path);
void write_rate_table(const JumpRateSpec& rate, const std::filesystem::path& path);

struct CompatibilityReport {
  bool holds = false;
  double worst_violation = 0.0;  // max absolute residual
  Counts worst_at;
};

/// Exhaustive check of g1(k) g2(k-e1) = g1(k-e2) g2(k) on {1..box_extent}^2.
/// `holds` uses a relative tolerance of 1e-9.
CompatibilityReport check_compatibility(const JumpRateSpec& rate, Count box_extent);

/// Max of |g(k)|_1 / (g* |k|_1) over the box; <= 1 when the Lipschitz bound holds.
double lipschitz_ratio(const JumpRateSpec& rate, Count box_extent);

/// Natural log of g!(k), taking all e1 steps first and then all e2 steps.
/// Throws DomainError when a factor vanishes (non-degeneracy violated).
double log_g_factorial(const JumpRateSpec& rate, Counts k);

/// Max relative discrepancy of g!(k) between the "e1 first" and "e2 first"
/// increasing paths (both evaluated in log space).
double path_independence_probe(const JumpRateSpec& rate, Counts k);

/// Table of log g!(k) over the shells |k|_1 = 0..shells, built once and read
/// concurrently. Shell n is stored as n+1 values indexed by k1.
class LogFactorialTable {
 public:
  LogFactorialTable(const JumpRateSpec& rate, Count shells);

  Count shells() const { return shells_; }
  double operator()(Count k1, Count k2) const { return data_[offset(k1 + k2) + k1]; }
  const double* shell(Count n) const { return data_.data() + offset(n); }

 private:
  static std::size_t offset(Count n) { return static_cast<std::size_t>(n) * (n + 1) / 2; }

  Count shells_;
  std::vector<double> data_;
};

}  // namespace zrp
