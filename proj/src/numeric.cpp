#include "seisbed/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seisbed/errors.hpp"

namespace seisbed {

double pairwise_sum(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

double logsumexp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) {
    if (x.empty() || m < 0.0) {
      throw numeric_error("logsumexp: all terms underflowed to -inf");
    }
    return m;  // +inf or nan propagates
  }
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double regression_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

MeanStderr mean_stderr(std::span<const double> x) {
  const std::size_t n = x.size();
  const double mean = pairwise_sum(x) / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  std::vector<double> dev2(n);
  for (std::size_t i = 0; i < n; ++i) dev2[i] = (x[i] - mean) * (x[i] - mean);
  const double var = pairwise_sum(dev2) / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace seisbed
