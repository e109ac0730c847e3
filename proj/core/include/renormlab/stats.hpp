#pragma once

#include <span>
#include <vector>

namespace renormlab {

/// Unweighted least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

/// Sample mean and standard error (sample standard deviation / sqrt(M)), summed in index order.
MeanEstimate mean_and_stderr(std::span<const double> samples);

/// L^q norm in time of a sequence g(t_k) sampled on a uniform grid:
/// composite Simpson when the interval count is even, trapezoid otherwise; max for q = infinity.
double time_norm(std::span<const double> values, double dt, double q);

}  // namespace renormlab
