#pragma once

#include <span>
#include <vector>

namespace seisbed {

/// Pairwise (cascade) summation; deterministic for a fixed element order.
double pairwise_sum(std::span<const double> x);

/// log(sum_i exp(x_i)) evaluated stably; -inf entries are allowed.
double logsumexp(std::span<const double> x);

/// Least-squares slope of y against x.
double regression_slope(std::span<const double> x, std::span<const double> y);

struct MeanStderr {
  double mean;
  double stderr_;  // standard error of the mean
};

/// Sample mean and standard error (pairwise accumulation).
MeanStderr mean_stderr(std::span<const double> x);

}  // namespace seisbed
