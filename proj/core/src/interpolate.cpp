#include "renormlab/interpolate.hpp"

#include <cmath>

namespace renormlab {

namespace {

void axis_weights(double t, std::array<double, 4>& w, std::array<double, 4>& dw) {
  // Nodes at offsets -1, 0, 1, 2 from floor(x / h).
  w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
  w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
  w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
  dw[0] = -(3.0 * t * t - 6.0 * t + 2.0) / 6.0;
  dw[1] = (3.0 * t * t - 4.0 * t - 1.0) / 2.0;
  dw[2] = -(3.0 * t * t - 2.0 * t - 2.0) / 2.0;
  dw[3] = (3.0 * t * t - 1.0) / 6.0;
}

}  // namespace

CubicStencil cubic_stencil(const Grid& grid, const Point& x) {
  CubicStencil s;
  s.dim = grid.dim;
  const double inv_h = 1.0 / grid.spacing();
  for (int d = 0; d < grid.dim; ++d) {
    const double u = x[d] * inv_h;
    const double fl = std::floor(u);
    s.base[d] = static_cast<int>(fl) - 1;
    axis_weights(u - fl, s.w[d], s.dw[d]);
    const std::size_t stride = (grid.dim == 2 && d == 0) ? static_cast<std::size_t>(grid.points) : 1;
    for (int a = 0; a < 4; ++a) {
      int i = (s.base[d] + a) % grid.points;
      if (i < 0) i += grid.points;
      s.offset[d][a] = static_cast<std::size_t>(i) * stride;
    }
    for (double& v : s.dw[d]) v *= inv_h;
  }
  return s;
}

double interpolate(const GridScalar& f, const CubicStencil& s) {
  const double* data = f.data();
  if (s.dim == 1) {
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += s.w[0][a] * data[s.offset[0][a]];
    return v;
  }
  double v = 0.0;
  for (int a = 0; a < 4; ++a) {
    const double* row_data = data + s.offset[0][a];
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += s.w[1][b] * row_data[s.offset[1][b]];
    v += s.w[0][a] * row;
  }
  return v;
}

Point interpolate_gradient(const GridScalar& f, const CubicStencil& s) {
  const double* data = f.data();
  if (s.dim == 1) {
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += s.dw[0][a] * data[s.offset[0][a]];
    return {v, 0.0};
  }
  double gx = 0.0, gy = 0.0;
  for (int a = 0; a < 4; ++a) {
    const double* row_data = data + s.offset[0][a];
    double row = 0.0, drow = 0.0;
    for (int b = 0; b < 4; ++b) {
      const double fv = row_data[s.offset[1][b]];
      row += s.w[1][b] * fv;
      drow += s.dw[1][b] * fv;
    }
    gx += s.dw[0][a] * row;
    gy += s.w[0][a] * drow;
  }
  return {gx, gy};
}

double interpolate(const GridScalar& f, const Point& x) { return interpolate(f, cubic_stencil(f.grid(), x)); }

}  // namespace renormlab
