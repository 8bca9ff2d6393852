#pragma once

#include <vector>

namespace gbcm {

// Linear interpolation between order statistics (q in [0, 1]).
double quantile(std::vector<double> values, double q);
double median(const std::vector<double>& values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares y ~ a + b x. r2 is 1 for a perfect fit and for
// constant y.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Fit of log(values[k]) against k over the trailing half of the sequence.
LinearFit trailing_log_fit(const std::vector<double>& values);

}  // namespace gbcm
