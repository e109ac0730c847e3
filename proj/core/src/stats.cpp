#include "renormlab/stats.hpp"

#include <cmath>

#include "renormlab/error.hpp"

namespace renormlab {

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::TooFewSamples, "slope fit needs matching series of length >= 2");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

MeanEstimate mean_and_stderr(std::span<const double> samples) {
  MeanEstimate e;
  e.samples = samples.size();
  if (samples.empty()) return e;
  double s = 0.0;
  for (double v : samples) s += v;
  e.mean = s / static_cast<double>(samples.size());
  if (samples.size() < 2) return e;
  double ss = 0.0;
  for (double v : samples) ss += (v - e.mean) * (v - e.mean);
  const double var = ss / static_cast<double>(samples.size() - 1);
  e.stderr_ = std::sqrt(var / static_cast<double>(samples.size()));
  return e;
}

double time_norm(std::span<const double> values, double dt, double q) {
  if (values.size() < 2) fail(ErrorCode::TooFewSamples, "time norm needs at least two samples");
  if (!(q >= 1.0)) fail(ErrorCode::BadExponent, "time norm needs q >= 1");
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  const std::size_t intervals = values.size() - 1;
  auto g = [&](std::size_t k) { return std::pow(std::abs(values[k]), q); };
  double s = 0.0;
  if (intervals % 2 == 0) {
    s = g(0) + g(intervals);
    for (std::size_t k = 1; k < intervals; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * g(k);
    s *= dt / 3.0;
  } else {
    s = 0.5 * (g(0) + g(intervals));
    for (std::size_t k = 1; k < intervals; ++k) s += g(k);
    s *= dt;
  }
  return std::pow(s, 1.0 / q);
}

}  // namespace renormlab
