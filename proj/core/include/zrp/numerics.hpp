#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace zrp::numerics {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct LeastSquaresFit {
  Eigen::VectorXd coefficients;
  double rms_residual = 0.0;
};

/// Least squares fit of y against the columns produced by `basis(x)`.
LeastSquaresFit least_squares(std::span<const double> x, std::span<const double> y,
                              const std::function<Eigen::VectorXd(double)>& basis);

struct Maximum {
  double argmax = 0.0;
  double value = 0.0;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
Maximum golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                           double bracket_tol);

/// Slope of an ordinary least-squares line through (x, y).
double fitted_slope(std::span<const double> x, std::span<const double> y);

inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

}  // namespace zrp::numerics
