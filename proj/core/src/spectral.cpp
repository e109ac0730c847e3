#include "renormlab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "renormlab/error.hpp"

namespace renormlab {

namespace {

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

// FFTW's planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

const PlanPair& plans_for(const Grid& grid) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  const auto key = std::make_pair(grid.dim, grid.points);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const int n = grid.points;
  const std::size_t real_size = grid.size();
  const std::size_t half = static_cast<std::size_t>(n / 2 + 1) * (grid.dim == 1 ? 1 : static_cast<std::size_t>(n));
  double* in = fftw_alloc_real(real_size);
  fftw_complex* out = fftw_alloc_complex(half);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  if (grid.dim == 1) {
    p.r2c = fftw_plan_dft_r2c_1d(n, in, out, flags);
    p.c2r = fftw_plan_dft_c2r_1d(n, out, in, flags);
  } else {
    p.r2c = fftw_plan_dft_r2c_2d(n, n, in, out, flags);
    p.c2r = fftw_plan_dft_c2r_2d(n, n, out, in, flags);
  }
  fftw_free(in);
  fftw_free(out);
  return cache.emplace(key, p).first->second;
}

bool is_nyquist(const Grid& grid, int m) { return 2 * std::abs(m) == grid.points; }

std::complex<double> derivative_factor(const Grid& grid, int m, int order) {
  if (order == 0) return 1.0;
  // The Nyquist mode has no odd derivative for real data; its second derivative is kept.
  if (order == 1 && is_nyquist(grid, m)) return 0.0;
  const double k = wavenumber(grid, m);
  return order == 1 ? std::complex<double>(0.0, k) : std::complex<double>(-k * k, 0.0);
}

}  // namespace

MultiIndex MultiIndex::pair(int i, int j) {
  MultiIndex a;
  (i == 0 ? a.x : a.y) += 1;
  (j == 0 ? a.x : a.y) += 1;
  return a;
}

Spectrum::Spectrum(const Grid& grid)
    : grid_(grid),
      coeffs_(static_cast<std::size_t>(grid.points / 2 + 1) *
              (grid.dim == 1 ? 1 : static_cast<std::size_t>(grid.points))) {}

std::array<int, 2> Spectrum::modes(std::size_t k) const {
  const int n = grid_.points;
  if (grid_.dim == 1) return {static_cast<int>(k), 0};
  const auto h = static_cast<std::size_t>(half());
  const int i = static_cast<int>(k / h);
  const int j = static_cast<int>(k % h);
  return {i <= n / 2 ? i : i - n, j};
}

double wavenumber(const Grid& grid, int m) { return 2.0 * std::numbers::pi * m / grid.length; }

Spectrum forward_fft(const GridScalar& f) {
  Spectrum s(f.grid());
  const auto& p = plans_for(f.grid());
  // FFTW's r2c does not modify its input for these plans, but the API takes a non-const pointer.
  fftw_execute_dft_r2c(p.r2c, const_cast<double*>(f.values().data()),
                       reinterpret_cast<fftw_complex*>(s.coeffs().data()));
  return s;
}

GridScalar inverse_fft(Spectrum s) {
  GridScalar out(s.grid());
  const auto& p = plans_for(s.grid());
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(s.coeffs().data()), out.values().data());
  out *= 1.0 / static_cast<double>(s.grid().size());
  return out;
}

GridScalar spectral_derivative(const Spectrum& f, MultiIndex alpha) {
  if (alpha.x < 0 || alpha.y < 0) fail(ErrorCode::BadIndex, "negative derivative order");
  if (alpha.order() > 2) fail(ErrorCode::OrderTooHigh, "derivative order above 2 is unsupported");
  if (f.grid().dim == 1 && alpha.y != 0) fail(ErrorCode::BadIndex, "y-derivative on a 1-D grid");
  Spectrum s = f;
  const Grid& g = f.grid();
  s.apply([&](const std::array<int, 2>& m) {
    return derivative_factor(g, m[0], alpha.x) * derivative_factor(g, m[1], alpha.y);
  });
  return inverse_fft(std::move(s));
}

GridScalar spectral_derivative(const GridScalar& f, MultiIndex alpha) {
  return spectral_derivative(forward_fft(f), alpha);
}

GridVector gradient(const GridScalar& f) {
  const Spectrum s = forward_fft(f);
  GridVector out(f.grid());
  for (int d = 0; d < f.grid().dim; ++d) out[d] = spectral_derivative(s, MultiIndex::axis(d));
  return out;
}

GridScalar divergence(const GridVector& v) {
  GridScalar out(v.grid());
  for (int d = 0; d < v.dim(); ++d) out += spectral_derivative(v[d], MultiIndex::axis(d));
  return out;
}

GridScalar laplacian(const GridScalar& f) {
  const Spectrum s = forward_fft(f);
  GridScalar out(f.grid());
  for (int d = 0; d < f.grid().dim; ++d) out += spectral_derivative(s, MultiIndex::pair(d, d));
  return out;
}

GridMatrix jacobian(const GridVector& v) {
  GridMatrix m;
  m.dim = v.dim();
  for (int i = 0; i < v.dim(); ++i) {
    const Spectrum s = forward_fft(v[i]);
    for (int j = 0; j < v.dim(); ++j) m.entry[i][j] = spectral_derivative(s, MultiIndex::axis(j));
  }
  return m;
}

GridScalar GridMatrix::trace() const {
  GridScalar t = entry[0][0];
  if (dim == 2) t += entry[1][1];
  return t;
}

GridScalar GridMatrix::frobenius() const {
  GridScalar out(entry[0][0].grid());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) s += entry[i][j][k] * entry[i][j][k];
    out[k] = std::sqrt(s);
  }
  return out;
}

GridScalar GridMatrix::operator_norm() const {
  if (dim == 1) return entry[0][0].map([](double v) { return std::abs(v); });
  GridScalar out(entry[0][0].grid());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double a = entry[0][0][k], b = entry[0][1][k], c = entry[1][0][k], d = entry[1][1][k];
    // Largest singular value of [[a, b], [c, d]].
    const double s = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    out[k] = std::sqrt(0.5 * (s + std::sqrt(std::max(0.0, s * s - 4.0 * det * det))));
  }
  return out;
}

GridScalar GridMatrix::det_identity_plus() const {
  if (dim == 1) return entry[0][0].map([](double v) { return 1.0 + v; });
  GridScalar out(entry[0][0].grid());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = (1.0 + entry[0][0][k]) * (1.0 + entry[1][1][k]) - entry[0][1][k] * entry[1][0][k];
  return out;
}

GridScalar GridMatrix::trace_of_square() const {
  GridScalar out(entry[0][0].grid());
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) out += entry[i][j] * entry[j][i];
  return out;
}

GridScalar circular_convolve(const GridScalar& f, const GridScalar& g) {
  require_same_grid(f.grid(), g.grid(), "circular_convolve");
  Spectrum a = forward_fft(f);
  const Spectrum b = forward_fft(g);
  for (std::size_t k = 0; k < a.coeffs().size(); ++k) a.coeffs()[k] *= b.coeffs()[k];
  GridScalar out = inverse_fft(std::move(a));
  out *= f.grid().cell_volume();
  return out;
}

double spectral_energy(const GridScalar& f) {
  const Spectrum s = forward_fft(f);
  const int n = f.grid().points;
  double e = 0.0;
  for (std::size_t k = 0; k < s.coeffs().size(); ++k) {
    const int m_last = s.modes(k)[f.grid().dim == 1 ? 0 : 1];
    const double w = (m_last == 0 || 2 * m_last == n) ? 1.0 : 2.0;
    e += w * std::norm(s.coeffs()[k]);
  }
  return e * f.grid().cell_volume() / static_cast<double>(f.grid().size());
}

}  // namespace renormlab
