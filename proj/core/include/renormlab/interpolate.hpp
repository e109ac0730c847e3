#pragma once

#include <array>

#include "renormlab/grid.hpp"

namespace renormlab {

/// Weights of 4-point periodic Lagrange (cubic) interpolation at one point.
/// Reusable across every field on the same grid.
struct CubicStencil {
  int dim = 1;
  std::array<int, 2> base{0, 0};
  std::array<std::array<std::size_t, 4>, 2> offset{};  ///< wrapped node offsets per axis (axis 0 premultiplied by N)
  std::array<std::array<double, 4>, 2> w{};
  std::array<std::array<double, 4>, 2> dw{};
};

CubicStencil cubic_stencil(const Grid& grid, const Point& x);

double interpolate(const GridScalar& f, const CubicStencil& s);
/// Gradient of the interpolant at the stencil point.
Point interpolate_gradient(const GridScalar& f, const CubicStencil& s);

double interpolate(const GridScalar& f, const Point& x);

}  // namespace renormlab
