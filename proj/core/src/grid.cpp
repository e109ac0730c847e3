#include "renormlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "renormlab/error.hpp"

namespace renormlab {

double Grid::cell_volume() const { return std::pow(spacing(), dim); }

std::size_t Grid::size() const {
  return dim == 1 ? static_cast<std::size_t>(points)
                  : static_cast<std::size_t>(points) * static_cast<std::size_t>(points);
}

static int wrap_index(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

std::size_t Grid::index(int i, int j) const {
  const auto a = static_cast<std::size_t>(wrap_index(i, points));
  if (dim == 1) return a;
  return a * static_cast<std::size_t>(points) + static_cast<std::size_t>(wrap_index(j, points));
}

Point Grid::node(std::size_t flat) const {
  const double h = spacing();
  if (dim == 1) return {static_cast<double>(flat) * h, 0.0};
  const auto n = static_cast<std::size_t>(points);
  return {static_cast<double>(flat / n) * h, static_cast<double>(flat % n) * h};
}

Grid build_grid(int dim, double length, int points) {
  if (dim != 1 && dim != 2) fail(ErrorCode::BadDimension, "dim must be 1 or 2, got " + std::to_string(dim));
  if (!(length > 0.0) || !std::isfinite(length)) fail(ErrorCode::BadLength, "box length must be positive");
  if (points % 2 != 0) fail(ErrorCode::OddN, "N must be even, got " + std::to_string(points));
  if (points < 8) fail(ErrorCode::TooSmallN, "N must be at least 8, got " + std::to_string(points));
  return Grid{dim, length, points};
}

void require_same_grid(const Grid& a, const Grid& b, const char* context) {
  if (!(a == b)) fail(ErrorCode::GridMismatch, std::string(context) + ": operands live on different grids");
}

double wrap_difference(double a, double b, double period) {
  double d = std::fmod(a - b, period);
  if (d >= 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}

Point offset_from_center(const Grid& grid, const Point& x) {
  Point out{0.0, 0.0};
  for (int d = 0; d < grid.dim; ++d) out[d] = wrap_difference(x[d], grid.center(), grid.length);
  return out;
}

// ---------------------------------------------------------------- GridScalar

GridScalar::GridScalar(const Grid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

GridScalar::GridScalar(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) fail(ErrorCode::GridMismatch, "value count does not match grid size");
}

bool GridScalar::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GridScalar::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridScalar::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * grid_.cell_volume();
}

GridScalar& GridScalar::operator+=(const GridScalar& o) {
  require_same_grid(grid_, o.grid_, "GridScalar +=");
  for (std::size_t k = 0; k < size(); ++k) values_[k] += o.values_[k];
  return *this;
}

GridScalar& GridScalar::operator-=(const GridScalar& o) {
  require_same_grid(grid_, o.grid_, "GridScalar -=");
  for (std::size_t k = 0; k < size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

GridScalar& GridScalar::operator*=(const GridScalar& o) {
  require_same_grid(grid_, o.grid_, "GridScalar *=");
  for (std::size_t k = 0; k < size(); ++k) values_[k] *= o.values_[k];
  return *this;
}

GridScalar& GridScalar::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridScalar operator+(GridScalar a, const GridScalar& b) { return a += b; }
GridScalar operator-(GridScalar a, const GridScalar& b) { return a -= b; }
GridScalar operator*(GridScalar a, const GridScalar& b) { return a *= b; }
GridScalar operator*(double s, GridScalar a) { return a *= s; }
GridScalar operator-(GridScalar a) { return a *= -1.0; }

double inner(const GridScalar& f, const GridScalar& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * g[k];
  return s * f.grid().cell_volume();
}

// ---------------------------------------------------------------- GridVector

GridVector::GridVector(const Grid& grid) : grid_(grid), comps_(static_cast<std::size_t>(grid.dim), GridScalar(grid)) {}

GridVector::GridVector(const Grid& grid, std::vector<GridScalar> components)
    : grid_(grid), comps_(std::move(components)) {
  if (comps_.size() != static_cast<std::size_t>(grid.dim))
    fail(ErrorCode::GridMismatch, "component count must equal grid dimension");
  for (const auto& c : comps_) require_same_grid(grid_, c.grid(), "GridVector");
}

GridVector GridVector::constant(const Grid& grid, const Point& c) {
  return sample(grid, [&](const Point&) { return c; });
}

Point GridVector::at(std::size_t flat) const {
  Point p{0.0, 0.0};
  for (int d = 0; d < dim(); ++d) p[d] = comps_[d][flat];
  return p;
}

bool GridVector::all_finite() const {
  return std::all_of(comps_.begin(), comps_.end(), [](const GridScalar& c) { return c.all_finite(); });
}

GridScalar GridVector::magnitude() const {
  GridScalar out(grid_);
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    double s = 0.0;
    for (const auto& c : comps_) s += c[k] * c[k];
    out[k] = std::sqrt(s);
  }
  return out;
}

double GridVector::max_abs() const { return magnitude().max_abs(); }

GridVector& GridVector::operator+=(const GridVector& o) {
  for (int d = 0; d < dim(); ++d) comps_[d] += o.comps_[d];
  return *this;
}

GridVector& GridVector::operator-=(const GridVector& o) {
  for (int d = 0; d < dim(); ++d) comps_[d] -= o.comps_[d];
  return *this;
}

GridVector& GridVector::operator*=(double s) {
  for (auto& c : comps_) c *= s;
  return *this;
}

GridVector operator+(GridVector a, const GridVector& b) { return a += b; }
GridVector operator-(GridVector a, const GridVector& b) { return a -= b; }
GridVector operator*(double s, GridVector a) { return a *= s; }

GridScalar dot(const GridVector& a, const GridVector& b) {
  require_same_grid(a.grid(), b.grid(), "dot");
  GridScalar out(a.grid());
  for (int d = 0; d < a.dim(); ++d) out += a[d] * b[d];
  return out;
}

// ------------------------------------------------------------ TimeGridVector

TimeGridVector::TimeGridVector(std::vector<double> times, std::vector<GridVector> slices)
    : times_(std::move(times)), slices_(std::move(slices)) {
  if (times_.size() < 2 || times_.size() != slices_.size())
    fail(ErrorCode::BadTimeGrid, "need at least two instants with one slice each");
  if (times_.front() != 0.0) fail(ErrorCode::BadTimeGrid, "first instant must be 0");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) fail(ErrorCode::BadTimeGrid, "instants must increase strictly");
    require_same_grid(slices_[0].grid(), slices_[k].grid(), "TimeGridVector");
  }
}

TimeGridVector TimeGridVector::constant(const GridVector& v, double T) {
  if (!(T > 0.0)) fail(ErrorCode::BadTimeGrid, "final time must be positive");
  return TimeGridVector({0.0, T}, {v, v});
}

TimeGridVector TimeGridVector::uniform(double T, int steps, const std::function<GridVector(double)>& fn) {
  if (!(T > 0.0) || steps < 1) fail(ErrorCode::BadTimeGrid, "uniform grid needs T > 0 and steps >= 1");
  std::vector<double> times(static_cast<std::size_t>(steps) + 1);
  std::vector<GridVector> slices;
  slices.reserve(times.size());
  for (int k = 0; k <= steps; ++k) {
    times[k] = (k == steps) ? T : T * k / steps;
    slices.push_back(fn(times[k]));
  }
  return TimeGridVector(std::move(times), std::move(slices));
}

std::pair<std::size_t, double> TimeGridVector::locate(double t) const {
  if (t <= times_.front()) return {0, 0.0};
  if (t >= times_.back()) return {times_.size() - 2, 1.0};
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
  return {k, w};
}

GridVector TimeGridVector::sample(double t) const {
  const auto [k, w] = locate(t);
  if (w == 0.0) return slices_[k];
  if (w == 1.0) return slices_[k + 1];
  return (1.0 - w) * slices_[k] + w * slices_[k + 1];
}

bool TimeGridVector::is_static() const {
  for (std::size_t k = 1; k < slices_.size(); ++k)
    for (int d = 0; d < slices_[0].dim(); ++d)
      if (slices_[k][d].values() != slices_[0][d].values()) return false;
  return true;
}

}  // namespace renormlab
