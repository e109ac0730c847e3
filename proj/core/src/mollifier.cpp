#include "renormlab/mollifier.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "renormlab/error.hpp"

namespace renormlab {

namespace {

/// Minimum-image displacement of node index i from the origin node, as an exact multiple of h.
double signed_node_offset(int i, const Grid& grid) {
  const int n = grid.points;
  const int m = (i <= n / 2) ? i : i - n;
  return m * grid.spacing();
}

Point node_displacement(const Grid& grid, std::size_t flat) {
  const auto n = static_cast<std::size_t>(grid.points);
  if (grid.dim == 1) return {signed_node_offset(static_cast<int>(flat), grid), 0.0};
  return {signed_node_offset(static_cast<int>(flat / n), grid), signed_node_offset(static_cast<int>(flat % n), grid)};
}

}  // namespace

double reference_bump(double r2) {
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

MollifierKernel mollifier(const Grid& grid, double epsilon) {
  const double h = grid.spacing();
  if (!(epsilon >= 2.0 * h * (1.0 - 1e-12)) || !(epsilon <= 0.25 * grid.length * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << "epsilon " << epsilon << " outside [2h, L/4] = [" << 2.0 * h << ", " << 0.25 * grid.length << "]";
    fail(ErrorCode::EpsilonOutOfRange, os.str());
  }
  MollifierKernel k{grid, epsilon, GridScalar(grid)};
  double mass = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = node_displacement(grid, i);
    const double r2 = (x[0] * x[0] + x[1] * x[1]) / (epsilon * epsilon);
    k.values[i] = reference_bump(r2);
    mass += k.values[i];
  }
  k.values *= 1.0 / (mass * grid.cell_volume());
  return k;
}

GridScalar convolve(const GridScalar& f, const MollifierKernel& kernel) {
  require_same_grid(f.grid(), kernel.grid, "convolve");
  return circular_convolve(f, kernel.values);
}

Region Region::centered(const Grid& grid, double half_width) {
  const double c = grid.center();
  return box({c - half_width, c - half_width}, {c + half_width, c + half_width});
}

bool Region::contains(const Grid& grid, std::size_t flat) const {
  if (whole) return true;
  const Point x = grid.node(flat);
  for (int d = 0; d < grid.dim; ++d)
    if (x[d] < lo[d] || x[d] > hi[d]) return false;
  return true;
}

double lp_norm(const GridScalar& f, double p, const Region& region) {
  if (!(p >= 1.0)) fail(ErrorCode::BadExponent, "L^p norm needs p >= 1");
  const Grid& g = f.grid();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
      if (region.contains(g, k)) m = std::max(m, std::abs(f[k]));
    return m;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (region.contains(g, k)) s += std::pow(std::abs(f[k]), p);
  return std::pow(s * g.cell_volume(), 1.0 / p);
}

double kernel_moment(const MollifierKernel& kernel, MultiIndex power, MultiIndex deriv) {
  if (power.x < 0 || power.y < 0 || power.order() > 2) fail(ErrorCode::BadIndex, "power index must satisfy |alpha| <= 2");
  if (deriv.x < 0 || deriv.y < 0 || deriv.order() > 2) fail(ErrorCode::BadIndex, "derivative index must satisfy |beta| <= 2");
  const Grid& g = kernel.grid;
  if (g.dim == 1 && (power.y != 0 || deriv.y != 0)) fail(ErrorCode::BadIndex, "y-index on a 1-D kernel");
  const GridScalar d = spectral_derivative(kernel.values, deriv);
  // The antipodal node is at +L/2 and -L/2 alike; its weight averages both images.
  const double half = 0.5 * g.length;
  const auto weight = [&](double x, int a) {
    if (std::abs(std::abs(x) - half) > 1e-9 * half) return std::pow(x, a);
    return 0.5 * (std::pow(half, a) + std::pow(-half, a));
  };
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point x = node_displacement(g, k);
    s += weight(x[0], power.x) * (g.dim == 2 ? weight(x[1], power.y) : 1.0) * d[k];
  }
  return s * g.cell_volume();
}

}  // namespace renormlab
