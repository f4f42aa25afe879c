#include "zrp/series.hpp"

#include "zrp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zrp::series {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Accumulator {
  double shift = -kInf;  // all sums are stored divided by exp(shift)
  double s0 = 0.0;
  Vec2 s1 = Vec2::Zero();
  Mat2 s2 = Mat2::Zero();

  void rescale_to(double new_shift) {
    if (shift > -kInf) {
      const double f = std::exp(shift - new_shift);
      s0 *= f;
      s1 *= f;
      s2 *= f;
    }
    shift = new_shift;
  }
};

// Tail Σ_{n > cap} c_cap (n/cap)^{-p} n^j approximated by the integral from cap + 1/2.
double power_tail(double c_cap, double cap, double p, int j) {
  const double e = p - j - 1.0;
  if (e <= 0.0) return kInf;
  return c_cap * std::pow(cap, p) * std::pow(cap + 0.5, -e) / e;
}

}  // namespace

Outcome sum_shells(const ShellFill& fill, const Control& control, bool two_species) {
  Accumulator acc;
  std::vector<double> log_terms;
  std::vector<double> log_shell;  // log c_n
  log_shell.reserve(1024);

  Outcome out;
  int quiet = 0;
  Count growing = 0;
  double prev_ratio = -kInf;

  // Shell-level composition at the last shell, used to split tail moments.
  Vec2 last_frac = Vec2::Zero();
  Mat2 last_frac2 = Mat2::Zero();

  Count n = 0;
  for (;; ++n) {
    fill(n, log_terms);
    double m = -kInf;
    for (double lt : log_terms) m = std::max(m, lt);

    double shell_mass = 0.0;  // scaled by exp(-shift)
    if (m > -kInf) {
      if (acc.shift == -kInf || m > acc.shift + 30.0) acc.rescale_to(m);
      Vec2 sh1 = Vec2::Zero();
      Mat2 sh2 = Mat2::Zero();
      for (std::size_t j = 0; j < log_terms.size(); ++j) {
        const double t = std::exp(log_terms[j] - acc.shift);
        if (t == 0.0) continue;
        const double k1 = two_species ? static_cast<double>(j) : static_cast<double>(n);
        const double k2 = two_species ? static_cast<double>(n - j) : 0.0;
        shell_mass += t;
        sh1[0] += k1 * t;
        sh1[1] += k2 * t;
        sh2(0, 0) += k1 * k1 * t;
        sh2(0, 1) += k1 * k2 * t;
        sh2(1, 1) += k2 * k2 * t;
      }
      sh2(1, 0) = sh2(0, 1);
      acc.s0 += shell_mass;
      acc.s1 += sh1;
      acc.s2 += sh2;
      if (shell_mass > 0.0 && n > 0) {
        const double nn = static_cast<double>(n);
        last_frac = sh1 / (shell_mass * nn);
        last_frac2 = sh2 / (shell_mass * nn * nn);
      }
    }
    const double log_c = shell_mass > 0.0 ? acc.shift + std::log(shell_mass) : -kInf;
    log_shell.push_back(log_c);

    if (n >= 1) {
      const double nn = std::max(1.0, static_cast<double>(n));
      if (shell_mass * nn * nn <= control.rel_tol * acc.s0) {
        ++quiet;
      } else {
        quiet = 0;
      }
      if (quiet >= 3) {
        out.status = Status::converged;
        out.error_bound = 3.0 * shell_mass / acc.s0;
        break;
      }

      const double prev = log_shell[n - 1];
      if (log_c > -kInf && prev > -kInf) {
        const double ratio = log_c - prev;
        if (ratio >= 0.0 && ratio >= prev_ratio - 1e-9) {
          ++growing;
        } else {
          growing = 0;
        }
        prev_ratio = ratio;
        if (growing >= control.probation) {
          out.status = Status::divergent;
          out.last_shell = n;
          out.log_z = kInf;
          return out;
        }
      }
    }

    if (n >= control.cap) {
      out.status = Status::tail_extrapolated;
      break;
    }
  }
  out.last_shell = n;

  if (out.status == Status::tail_extrapolated) {
    const Count half = std::max<Count>(1, n / 2);
    const double lc_end = log_shell[n];
    const double lc_half = log_shell[half];
    if (lc_end > -kInf && lc_half > -kInf && half < n) {
      const double p = -(lc_end - lc_half) / std::log(static_cast<double>(n) / half);
      out.tail_exponent = p;
      const double c_cap = std::exp(lc_end - acc.shift);
      const double cap = static_cast<double>(n);
      const double t0 = power_tail(c_cap, cap, p, 0);
      if (!std::isfinite(t0)) {
        out.status = Status::divergent;
        out.log_z = kInf;
        return out;
      }
      const double t1 = power_tail(c_cap, cap, p, 1);
      const double t2 = power_tail(c_cap, cap, p, 2);
      acc.s0 += t0;
      out.error_bound = t0 / acc.s0;
      out.log_z = acc.shift + std::log(acc.s0);
      if (!std::isfinite(t1)) {
        out.mean = Vec2(last_frac[0] > 0 ? kInf : 0.0, last_frac[1] > 0 ? kInf : 0.0);
        out.covariance = Mat2::Constant(kInf);
        return out;
      }
      acc.s1 += t1 * last_frac;
      out.mean = acc.s1 / acc.s0;
      if (!std::isfinite(t2)) {
        out.covariance = Mat2::Constant(kInf);
        return out;
      }
      acc.s2 += t2 * last_frac2;
      out.covariance = acc.s2 / acc.s0 - out.mean * out.mean.transpose();
      return out;
    }
  }

  out.log_z = acc.shift + std::log(acc.s0);
  out.mean = acc.s1 / acc.s0;
  out.covariance = acc.s2 / acc.s0 - out.mean * out.mean.transpose();
  return out;
}

}  // namespace zrp::series

namespace zrp::series {

LimitEstimate extrapolate_limit(std::span<const double> n, std::span<const double> a,
                                double tolerance) {
  LimitEstimate est;
  const auto growth = numerics::least_squares(n, a, [](double x) {
    Eigen::VectorXd b(5);
    b << 1.0, std::log(x), std::log(x) / x, 1.0 / x, 1.0 / (x * x);
    return b;
  });
  if (growth.coefficients[1] > 0.01 && a.back() > a.front()) {
    est.unbounded = true;
    est.value = std::numeric_limits<double>::infinity();
    est.residual = growth.rms_residual;
    return est;
  }
  const auto fit = numerics::least_squares(n, a, [](double x) {
    Eigen::VectorXd b(4);
    b << 1.0, std::log(x) / x, 1.0 / x, 1.0 / (x * x);
    return b;
  });
  est.value = fit.coefficients[0];
  est.residual = fit.rms_residual;
  est.converged = fit.rms_residual <= tolerance;
  return est;
}

}  // namespace zrp::series
