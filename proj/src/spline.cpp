#include "cholsim/spline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "cholsim/errors.hpp"

namespace cholsim {
namespace {

// Second derivatives of the natural cubic interpolant through (knots, values):
// the classic tridiagonal system with zero curvature at both ends.
std::vector<double> natural_second_derivatives(const std::vector<double>& t,
                                               const std::vector<double>& y) {
  const std::size_t n = t.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  // Thomas elimination on rows 1..n-2 (rows 0 and n-1 are identities).
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double w = (t[i] - t[i - 1]) / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    if (i == 1) break;
  }
  return m;
}

}  // namespace

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> knots,
                                       std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() < 2)
    throw TooFewPoints("spline needs at least two knots");
  if (knots_.size() != values_.size())
    throw InvalidConfig("spline knots and values must have equal size");
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (!(knots_[i] > knots_[i - 1]))
      throw InvalidConfig("spline knots must be strictly increasing");
  second_derivs_ = natural_second_derivatives(knots_, values_);
}

double NaturalCubicSpline::evaluate(double t) const {
  const double lo = knots_.front();
  const double hi = knots_.back();
  t = std::clamp(t, lo, hi);
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  std::size_t j = static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(it - knots_.begin() - 1, 0,
                                 static_cast<std::ptrdiff_t>(knots_.size()) - 2));
  const double h = knots_[j + 1] - knots_[j];
  const double a = (knots_[j + 1] - t) / h;
  const double b = (t - knots_[j]) / h;
  return a * values_[j] + b * values_[j + 1] +
         ((a * a * a - a) * second_derivs_[j] +
          (b * b * b - b) * second_derivs_[j + 1]) *
             (h * h) / 6.0;
}

NaturalCubicSpline fit_least_squares_spline(const std::vector<double>& params,
                                            const std::vector<double>& samples,
                                            int num_knots) {
  if (num_knots < 2) throw InvalidConfig("need at least two knots");
  if (params.size() != samples.size())
    throw InvalidConfig("params and samples must have equal size");
  if (params.size() < static_cast<std::size_t>(num_knots))
    throw TooFewPoints("need at least as many samples as knots");

  const auto [lo_it, hi_it] = std::minmax_element(params.begin(), params.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!(hi > lo)) {
    // Degenerate parameterization: every sample at one knot; spread the range
    // so the basis stays well defined and the fit returns the mean.
    lo -= 0.5;
    hi += 0.5;
  }

  std::vector<double> knots(num_knots);
  for (int k = 0; k < num_knots; ++k)
    knots[k] = lo + (hi - lo) * k / (num_knots - 1);

  // Cardinal basis: column k is the natural spline through the unit vector at
  // knot k, evaluated at every parameter. Knot values then solve ordinary
  // least squares.
  Eigen::MatrixXd design(params.size(), num_knots);
  for (int k = 0; k < num_knots; ++k) {
    std::vector<double> unit(num_knots, 0.0);
    unit[static_cast<std::size_t>(k)] = 1.0;
    const NaturalCubicSpline basis(knots, unit);
    for (std::size_t i = 0; i < params.size(); ++i)
      design(static_cast<Eigen::Index>(i), k) = basis.evaluate(params[i]);
  }
  Eigen::VectorXd b(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    b(static_cast<Eigen::Index>(i)) = samples[i];

  // Tiny ridge keeps the normal equations solvable when parameters cluster
  // and leave interior knots unsupported.
  Eigen::MatrixXd normal = design.transpose() * design;
  normal.diagonal().array() += 1e-12;
  const Eigen::VectorXd coeffs =
      normal.ldlt().solve(design.transpose() * b);

  std::vector<double> values(coeffs.data(), coeffs.data() + num_knots);
  return NaturalCubicSpline(knots, values);
}

}  // namespace cholsim
