#pragma once

#include <complex>
#include <vector>

#include "renormlab/grid.hpp"

namespace renormlab {

/// Derivative orders per axis; total order is limited to 2.
struct MultiIndex {
  int x = 0;
  int y = 0;
  int order() const { return x + y; }
  static MultiIndex axis(int d) { return d == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1}; }
  static MultiIndex pair(int i, int j);
};

/// Half-complex discrete Fourier coefficients of a real field (unnormalized forward transform).
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::vector<std::complex<double>>& coeffs() { return coeffs_; }
  const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }
  /// Number of stored modes along the last (halved) axis.
  int half() const { return grid_.points / 2 + 1; }

  /// Integer mode numbers (m0, m1) of a stored coefficient.
  std::array<int, 2> modes(std::size_t k) const;

  template <class F>
  void apply(F&& multiplier) {
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] *= multiplier(modes(k));
  }

 private:
  Grid grid_{};
  std::vector<std::complex<double>> coeffs_;
};

Spectrum forward_fft(const GridScalar& f);
GridScalar inverse_fft(Spectrum s);

/// Physical wavenumber 2*pi*m/L.
double wavenumber(const Grid& grid, int m);

/// Fourier multiplier derivative. Nyquist modes are zeroed along axes differentiated once and kept
/// (as -k^2) along axes differentiated twice.
GridScalar spectral_derivative(const GridScalar& f, MultiIndex alpha);
GridScalar spectral_derivative(const Spectrum& f, MultiIndex alpha);

GridVector gradient(const GridScalar& f);
GridScalar divergence(const GridVector& v);
GridScalar laplacian(const GridScalar& f);

/// Matrix field d_j v_i stored as rows i, columns j.
struct GridMatrix {
  std::array<std::array<GridScalar, 2>, 2> entry;
  int dim = 1;
  const GridScalar& operator()(int i, int j) const { return entry[i][j]; }
  GridScalar& operator()(int i, int j) { return entry[i][j]; }
  GridScalar trace() const;
  /// Pointwise Frobenius norm.
  GridScalar frobenius() const;
  /// Pointwise operator 2-norm.
  GridScalar operator_norm() const;
  /// Pointwise det(I + M).
  GridScalar det_identity_plus() const;
  /// Pointwise d_i v_j d_j v_i = tr(M M).
  GridScalar trace_of_square() const;
};

GridMatrix jacobian(const GridVector& v);

/// Periodic circular convolution (f * g)(x_i) = sum_j f(x_j) g(x_i - x_j) h^n.
GridScalar circular_convolve(const GridScalar& f, const GridScalar& g);

/// Parseval energy sum_k |F_k|^2 h^n / N^n, equal to the discrete L2 norm squared.
double spectral_energy(const GridScalar& f);

}  // namespace renormlab
