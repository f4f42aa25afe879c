#include "zrp/numerics.hpp"

#include <Eigen/Dense>

#include "zrp/errors.hpp"

namespace zrp::numerics {

LeastSquaresFit least_squares(std::span<const double> x, std::span<const double> y,
                              const std::function<Eigen::VectorXd(double)>& basis) {
  if (x.size() != y.size() || x.empty()) throw DomainError("least_squares: bad sample sizes");
  const Eigen::Index cols = basis(x[0]).size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), cols);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = basis(x[i]).transpose();
    b[static_cast<Eigen::Index>(i)] = y[i];
  }
  LeastSquaresFit fit;
  fit.coefficients = a.colPivHouseholderQr().solve(b);
  fit.rms_residual = std::sqrt((a * fit.coefficients - b).squaredNorm() / static_cast<double>(x.size()));
  return fit;
}

Maximum golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                           double bracket_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > bracket_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? Maximum{c, fc} : Maximum{d, fd};
}

double fitted_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace zrp::numerics
