#pragma once

#include "renormlab/grid.hpp"
#include "renormlab/spectral.hpp"

namespace renormlab {

/// Reference bump exp(-1/(1-r^2)) on r < 1, without normalization.
double reference_bump(double r2);

/// Discrete rescaled mollifier eta_eps on a grid, centered at the origin node.
struct MollifierKernel {
  Grid grid{};
  double epsilon = 0.0;
  GridScalar values;
};

/// Requires 2h <= epsilon <= L/4. The kernel is divided by its discrete mass.
MollifierKernel mollifier(const Grid& grid, double epsilon);

/// Periodic convolution eta_eps * f by FFT.
GridScalar convolve(const GridScalar& f, const MollifierKernel& kernel);

/// Axis-aligned sub-box [lo, hi) of node coordinates, or the whole box.
struct Region {
  bool whole = true;
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};

  static Region whole_box() { return {}; }
  static Region box(Point lo, Point hi) { return {false, lo, hi}; }
  /// Central sub-box [L/2 - a, L/2 + a]^n.
  static Region centered(const Grid& grid, double half_width);
  bool contains(const Grid& grid, std::size_t flat) const;
};

/// (sum_K |f|^p h^n)^(1/p), or max_K |f| for p = infinity.
double lp_norm(const GridScalar& f, double p, const Region& region = Region::whole_box());

/// Discrete integral of x^alpha d^beta eta_eps, with x the minimum-image displacement
/// from the kernel center and the derivative taken spectrally.
double kernel_moment(const MollifierKernel& kernel, MultiIndex power, MultiIndex deriv);

}  // namespace renormlab
