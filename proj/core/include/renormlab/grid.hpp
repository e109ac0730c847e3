#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace renormlab {

using Point = std::array<double, 2>;

/// Periodic box [0, L)^dim sampled at N points per axis.
struct Grid {
  int dim = 1;
  double length = 1.0;
  int points = 8;

  double spacing() const { return length / points; }
  double cell_volume() const;
  std::size_t size() const;
  double center() const { return 0.5 * length; }

  /// Flat index with periodic wrap; axis 0 is the slow index in 2-D.
  std::size_t index(int i, int j = 0) const;
  Point node(std::size_t flat) const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

Grid build_grid(int dim, double length, int points);

void require_same_grid(const Grid& a, const Grid& b, const char* context);

/// Signed periodic displacement of x from the box center, per axis.
Point offset_from_center(const Grid& grid, const Point& x);

/// Signed minimum-image difference a - b on a circle of the given period.
double wrap_difference(double a, double b, double period);

class GridScalar {
 public:
  GridScalar() = default;
  explicit GridScalar(const Grid& grid, double fill = 0.0);
  GridScalar(const Grid& grid, std::vector<double> values);

  template <class F>
  static GridScalar sample(const Grid& grid, F&& fn) {
    GridScalar out(grid);
    for (std::size_t k = 0; k < out.size(); ++k) out.values_[k] = fn(grid.node(k));
    return out;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }
  double at(int i, int j = 0) const { return values_[grid_.index(i, j)]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  const double* data() const { return values_.data(); }

  bool all_finite() const;
  double max_abs() const;
  /// Quadrature of the field over the box.
  double integral() const;

  GridScalar& operator+=(const GridScalar& o);
  GridScalar& operator-=(const GridScalar& o);
  GridScalar& operator*=(const GridScalar& o);
  GridScalar& operator*=(double s);

  template <class F>
  GridScalar map(F&& fn) const {
    GridScalar out(grid_);
    for (std::size_t k = 0; k < size(); ++k) out.values_[k] = fn(values_[k]);
    return out;
  }

 private:
  Grid grid_{};
  std::vector<double> values_;
};

GridScalar operator+(GridScalar a, const GridScalar& b);
GridScalar operator-(GridScalar a, const GridScalar& b);
GridScalar operator*(GridScalar a, const GridScalar& b);
GridScalar operator*(double s, GridScalar a);
GridScalar operator-(GridScalar a);

/// Quadrature pairing <f, g> over the box.
double inner(const GridScalar& f, const GridScalar& g);

class GridVector {
 public:
  GridVector() = default;
  explicit GridVector(const Grid& grid);
  GridVector(const Grid& grid, std::vector<GridScalar> components);

  template <class F>
  static GridVector sample(const Grid& grid, F&& fn) {
    GridVector out(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Point v = fn(grid.node(k));
      for (int d = 0; d < grid.dim; ++d) out.comps_[d][k] = v[d];
    }
    return out;
  }
  static GridVector constant(const Grid& grid, const Point& c);

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  GridScalar& operator[](int d) { return comps_[d]; }
  const GridScalar& operator[](int d) const { return comps_[d]; }
  const std::vector<GridScalar>& components() const { return comps_; }

  Point at(std::size_t flat) const;
  bool all_finite() const;
  /// Pointwise Euclidean magnitude.
  GridScalar magnitude() const;
  double max_abs() const;

  GridVector& operator+=(const GridVector& o);
  GridVector& operator-=(const GridVector& o);
  GridVector& operator*=(double s);

 private:
  Grid grid_{};
  std::vector<GridScalar> comps_;
};

GridVector operator+(GridVector a, const GridVector& b);
GridVector operator-(GridVector a, const GridVector& b);
GridVector operator*(double s, GridVector a);

/// Pointwise dot product a·b.
GridScalar dot(const GridVector& a, const GridVector& b);

/// Time-dependent vector field sampled at increasing instants 0 = t_0 < ... < t_m = T.
class TimeGridVector {
 public:
  TimeGridVector() = default;
  TimeGridVector(std::vector<double> times, std::vector<GridVector> slices);
  /// Time-independent field on [0, T].
  static TimeGridVector constant(const GridVector& v, double T);
  /// Samples fn(t) at `steps + 1` uniform instants of [0, T].
  static TimeGridVector uniform(double T, int steps, const std::function<GridVector(double)>& fn);

  const Grid& grid() const { return slices_.front().grid(); }
  double final_time() const { return times_.back(); }
  std::size_t count() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<GridVector>& slices() const { return slices_; }
  const GridVector& slice(std::size_t k) const { return slices_[k]; }
  GridVector& slice(std::size_t k) { return slices_[k]; }

  /// Locates t: slice index k and weight w so that value = (1-w) slice k + w slice k+1.
  std::pair<std::size_t, double> locate(double t) const;
  /// Linear interpolation in time.
  GridVector sample(double t) const;
  bool is_static() const;

 private:
  std::vector<double> times_;
  std::vector<GridVector> slices_;
};

}  // namespace renormlab
