#pragma once

#include <vector>

namespace cholsim {

// Natural cubic interpolating spline on fixed knots (second derivative zero
// at both ends). Used as the basis for least-squares curve fits.
class NaturalCubicSpline {
 public:
  // knots strictly increasing, values same size (>= 2). Throws TooFewPoints /
  // InvalidConfig on bad input.
  NaturalCubicSpline(std::vector<double> knots, std::vector<double> values);

  double evaluate(double t) const;  // clamped extrapolation outside knots

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_derivs_;
};

// Least-squares natural cubic spline: finds knot values minimizing the sum of
// squared errors of spline(params[i]) against samples[i]. params need not be
// sorted; knots are uniform over [params.min, params.max].
// Requires samples.size() >= num_knots >= 2.
NaturalCubicSpline fit_least_squares_spline(const std::vector<double>& params,
                                            const std::vector<double>& samples,
                                            int num_knots);

}  // namespace cholsim
