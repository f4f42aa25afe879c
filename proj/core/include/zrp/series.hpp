#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "zrp/types.hpp"

namespace zrp::series {

struct Control {
  double rel_tol = 1e-14;
  Count cap = 100000;      // last shell summed explicitly
  Count probation = 64;    // consecutive growing shells that signal divergence
};

enum class Status {
  converged,          // stopping rule met before the cap
  tail_extrapolated,  // cap reached; power-law tail added to every finite moment
  divergent,          // series itself diverges
};

/// Result of a (one- or two-species) generating-function sweep.
struct Outcome {
  Status status = Status::converged;
  double log_z = 0.0;
  Vec2 mean = Vec2::Zero();   // +inf entries when the first moment diverges
  Mat2 covariance = Mat2::Zero();
  Count last_shell = 0;
  double error_bound = 0.0;   // relative bound on the truncated mass of Z
  double tail_exponent = 0.0; // fitted decay exponent of shell masses at the cap
};

/// Fills `log_terms` (resized by the callee) with the log weights of shell n.
/// For two-species sums entry j is k = (j, n - j); for one-species sums the
/// single entry is k = (n, 0).
using ShellFill = std::function<void(Count n, std::vector<double>& log_terms)>;

/// Sums Σ_n Σ_{|k|=n} exp(log_term(k)) shell by shell together with the first
/// and second moments of k. Stops when n^2 times the shell mass drops below
/// rel_tol times the partial sum for three consecutive shells. A shell
/// log-ratio that is non-negative and non-decreasing for `probation` shells
/// signals divergence; at the cap a power-law tail c n^{-p} is fitted and
/// added (moment j diverges when p <= j + 1).
Outcome sum_shells(const ShellFill& fill, const Control& control, bool two_species);

/// Limit of a sequence a_n = (1/n) log w(n) sampled at increasing n.
struct LimitEstimate {
  double value = 0.0;      // extrapolated limit (meaningless when unbounded)
  bool unbounded = false;  // a_n grows like log n
  bool converged = true;   // fit residual within tolerance
  double residual = 0.0;
};

/// Fits a_n = c + α log(n)/n + β/n + γ/n^2; a first fit with an extra log n
/// column decides whether a_n diverges (coefficient above 0.01).
LimitEstimate extrapolate_limit(std::span<const double> n, std::span<const double> a,
                                double tolerance = 1e-6);

}  // namespace zrp::series
