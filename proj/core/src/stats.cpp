#include "gbcm/stats.hpp"

#include <algorithm>
#include <cmath>

#include "gbcm/error.hpp"

namespace gbcm {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile: empty sample");
  if (q < 0.0 || q > 1.0) throw DomainError("quantile: level outside [0, 1]");
  std::sort(values.begin(), values.end());
  double pos = q * (values.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = std::min(lo + 1, values.size() - 1);
  double f = pos - lo;
  return values[lo] + f * (values[hi] - values[lo]);
}

double median(const std::vector<double>& values) { return quantile(values, 0.5); }

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("linear fit: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("linear fit: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

LinearFit trailing_log_fit(const std::vector<double>& values) {
  const size_t n = values.size();
  size_t start = n / 2;
  if (n - start < 2) start = n >= 2 ? n - 2 : 0;
  std::vector<double> x, y;
  for (size_t k = start; k < n; ++k) {
    if (!(values[k] > 0.0)) continue;
    x.push_back(static_cast<double>(k));
    y.push_back(std::log(values[k]));
  }
  return linear_fit(x, y);
}

}  // namespace gbcm
