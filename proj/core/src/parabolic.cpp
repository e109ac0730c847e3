#include "renormlab/parabolic.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "renormlab/error.hpp"
#include "renormlab/mollifier.hpp"
#include "renormlab/parallel.hpp"
#include "renormlab/spectral.hpp"
#include "renormlab/stats.hpp"

namespace renormlab {

namespace {

double k_squared(const Grid& g, const std::array<int, 2>& m) {
  const double k0 = wavenumber(g, m[0]);
  const double k1 = g.dim == 2 ? wavenumber(g, m[1]) : 0.0;
  return k0 * k0 + k1 * k1;
}

/// Per-mode factors of the exact damped heat step over dt with forcing frozen on the step.
struct StepFactors {
  std::vector<double> decay;   ///< exp(-a dt)
  std::vector<double> weight;  ///< (1 - exp(-a dt)) / a
};

StepFactors step_factors(const Grid& g, double lambda, double dt) {
  const Spectrum shape(g);
  StepFactors f;
  f.decay.resize(shape.coeffs().size());
  f.weight.resize(shape.coeffs().size());
  for (std::size_t k = 0; k < shape.coeffs().size(); ++k) {
    const double a = lambda + 0.5 * k_squared(g, shape.modes(k));
    f.decay[k] = std::exp(-a * dt);
    f.weight[k] = -std::expm1(-a * dt) / a;
  }
  return f;
}

/// Forward-time problem: v(0) = 0, dv/ds = (1/2)Lap v - lambda v + g, g = bf + bf.grad v.
std::vector<GridVector> apply_mild_map(const std::vector<GridVector>& bf, const std::vector<GridVector>& v,
                                       const StepFactors& factors) {
  const Grid& g = bf.front().grid();
  const std::size_t steps = bf.size() - 1;
  std::vector<GridVector> next(bf.size(), GridVector(g));
  parallel_for(static_cast<std::size_t>(g.dim), [&](std::size_t ci) {
    const int i = static_cast<int>(ci);
    Spectrum state(g);
    for (std::size_t j = 0; j < steps; ++j) {
      const GridVector grad = gradient(v[j][i]);
      GridScalar forcing = bf[j][i];
      forcing += dot(bf[j], grad);
      const Spectrum fh = forward_fft(forcing);
      auto& c = state.coeffs();
      for (std::size_t k = 0; k < c.size(); ++k) c[k] = factors.decay[k] * c[k] + factors.weight[k] * fh.coeffs()[k];
      next[j + 1][i] = inverse_fft(state);
    }
  });
  return next;
}

double sup_distance(const std::vector<GridVector>& a, const std::vector<GridVector>& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    for (int d = 0; d < a[j].dim(); ++d) m = std::max(m, (a[j][d] - b[j][d]).max_abs());
  return m;
}

/// b resampled at the forward quadrature instants s_j = j dt, i.e. backward times T - s_j.
std::vector<GridVector> forward_drift(const TimeGridVector& b, double T, int steps) {
  std::vector<GridVector> bf;
  bf.reserve(static_cast<std::size_t>(steps) + 1);
  for (int j = 0; j <= steps; ++j) bf.push_back(b.sample(T - T * j / steps));
  return bf;
}

std::vector<GridVector> to_forward(const TimeGridVector& u) {
  std::vector<GridVector> v(u.slices().rbegin(), u.slices().rend());
  return v;
}

}  // namespace

GridScalar heat_apply(const GridScalar& g, double t) {
  if (t < 0.0) fail(ErrorCode::NegativeTime, "heat semigroup needs t >= 0");
  if (t == 0.0) return g;
  Spectrum s = forward_fft(g);
  const Grid& grid = g.grid();
  s.apply([&](const std::array<int, 2>& m) { return std::exp(-0.5 * k_squared(grid, m) * t); });
  return inverse_fft(std::move(s));
}

GridVector heat_apply(const GridVector& g, double t) {
  GridVector out(g.grid());
  for (int d = 0; d < g.dim(); ++d) out[d] = heat_apply(g[d], t);
  return out;
}

ParabolicSolution mild_solve(const TimeGridVector& b, double lambda, const MildSolveOptions& options) {
  if (!(lambda > 0.0)) fail(ErrorCode::BadLambda, "lambda must be positive");
  if (options.quad_steps < 1 || options.max_iter < 1 || !(options.tol > 0.0))
    fail(ErrorCode::BadTimeGrid, "mild_solve needs quad_steps >= 1, max_iter >= 1, tol > 0");
  const Grid& g = b.grid();
  const double T = b.final_time();
  const int M = options.quad_steps;
  const double dt = T / M;

  ParabolicSolution sol;
  sol.lambda = lambda;
  sol.final_time = T;
  double bmax = 0.0;
  for (const auto& s : b.slices()) bmax = std::max(bmax, s.max_abs());
  sol.contraction_estimate = g.dim * std::sqrt(2.0 / lambda) * bmax;
  sol.contraction_warning = sol.contraction_estimate >= 1.0;

  const std::vector<GridVector> bf = forward_drift(b, T, M);
  const StepFactors factors = step_factors(g, lambda, dt);
  std::vector<GridVector> v(bf.size(), GridVector(g));
  for (int it = 1; it <= options.max_iter; ++it) {
    std::vector<GridVector> next = apply_mild_map(bf, v, factors);
    const double defect = sup_distance(next, v);
    v = std::move(next);
    sol.defects.push_back(defect);
    sol.iterations = it;
    sol.residual = defect;
    if (!std::isfinite(defect)) break;
    if (defect <= options.tol) {
      std::vector<double> times(bf.size());
      for (int j = 0; j <= M; ++j) times[j] = (j == M) ? T : T * j / M;
      std::vector<GridVector> slices(v.rbegin(), v.rend());
      sol.u = TimeGridVector(std::move(times), std::move(slices));
      return sol;
    }
  }
  std::ostringstream os;
  os << "Picard iteration did not reach tol " << options.tol << " in " << sol.iterations
     << " iterations (last defect " << sol.residual << ", lambda " << lambda << ")";
  fail(ErrorCode::NotConverged, os.str());
}

double mild_map_defect(const ParabolicSolution& sol, const TimeGridVector& b) {
  const int M = static_cast<int>(sol.u.count()) - 1;
  const double T = sol.final_time;
  const std::vector<GridVector> bf = forward_drift(b, T, M);
  const std::vector<GridVector> v = to_forward(sol.u);
  return sup_distance(apply_mild_map(bf, v, step_factors(b.grid(), sol.lambda, T / M)), v);
}

double pde_residual(const ParabolicSolution& sol, const TimeGridVector& b) {
  const int M = static_cast<int>(sol.u.count()) - 1;
  const double T = sol.final_time;
  const double dt = T / M;
  const std::vector<GridVector> bf = forward_drift(b, T, M);
  const std::vector<GridVector> v = to_forward(sol.u);
  const Grid& g = b.grid();
  auto rhs = [&](std::size_t j, int i) {
    GridScalar out = bf[j][i];
    out += dot(bf[j], gradient(v[j][i]));
    out += 0.5 * laplacian(v[j][i]);
    out -= sol.lambda * v[j][i];
    return out;
  };
  std::vector<double> sq(static_cast<std::size_t>(M), 0.0);
  parallel_for(static_cast<std::size_t>(M), [&](std::size_t j) {
    for (int i = 0; i < g.dim; ++i) {
      GridScalar r = (1.0 / dt) * (v[j + 1][i] - v[j][i]);
      r -= 0.5 * (rhs(j, i) + rhs(j + 1, i));
      const double n2 = lp_norm(r, 2.0);
      sq[j] += n2 * n2;
    }
  });
  double total = 0.0;
  for (double s : sq) total += s * dt;
  return std::sqrt(total);
}

GridScalar derivative_magnitude(const GridVector& u, int alpha) {
  if (alpha < 0 || alpha > 2) fail(ErrorCode::OrderTooHigh, "derivative order must be 0, 1 or 2");
  if (alpha == 0) return u.magnitude();
  const Grid& g = u.grid();
  GridScalar sum(g);
  for (int i = 0; i < u.dim(); ++i) {
    const Spectrum s = forward_fft(u[i]);
    for (int l = 0; l < g.dim; ++l) {
      if (alpha == 1) {
        const GridScalar d = spectral_derivative(s, MultiIndex::axis(l));
        sum += d * d;
      } else {
        for (int m = 0; m < g.dim; ++m) {
          const GridScalar d = spectral_derivative(s, MultiIndex::pair(l, m));
          sum += d * d;
        }
      }
    }
  }
  return sum.map([](double v) { return std::sqrt(v); });
}

bool DecayStudy::matches_rate() const { return std::abs(fitted_slope + theory_delta) <= tolerance; }

DecayStudy decay_study(const TimeGridVector& b, const std::vector<double>& lambdas, int alpha, double r, double p,
                       double q, const MildSolveOptions& options) {
  if (lambdas.size() < 3) fail(ErrorCode::TooFewSamples, "decay study needs at least three lambdas");
  for (std::size_t k = 1; k < lambdas.size(); ++k)
    if (!(lambdas[k] > lambdas[k - 1])) fail(ErrorCode::BadLambda, "lambdas must increase");
  const int n = b.grid().dim;
  if (alpha < 0 || alpha > 2) fail(ErrorCode::OrderTooHigh, "alpha must be 0, 1 or 2");
  if (!(r >= 1.0) || (alpha < 2 && r > p) || (alpha == 2 && !(r < p)))
    fail(ErrorCode::BadExponent, "need r <= p for alpha in {0,1} and r < p for alpha = 2");
  if (!(q >= 1.0) || !(p >= 1.0) || !(2.0 / q + n / p < 1.0))
    fail(ErrorCode::BadExponent, "(p, q) must satisfy 2/q + n/p < 1");

  DecayStudy st;
  st.alpha = alpha;
  st.r = r;
  st.p = p;
  st.q = q;
  st.dim = n;
  st.lambdas = lambdas;
  st.theory_delta = 1.0 - 0.5 * alpha + 0.5 * n * (1.0 / r - 1.0 / p);
  st.norms.assign(lambdas.size(), 0.0);
  parallel_for(lambdas.size(), [&](std::size_t k) {
    const ParabolicSolution sol = mild_solve(b, lambdas[k], options);
    std::vector<double> per_slice(sol.u.count());
    for (std::size_t j = 0; j < sol.u.count(); ++j) per_slice[j] = lp_norm(derivative_magnitude(sol.u.slice(j), alpha), r);
    st.norms[k] = time_norm(per_slice, sol.final_time / (static_cast<double>(sol.u.count()) - 1.0), q);
  });
  st.fitted_slope = loglog_slope(st.lambdas, st.norms);
  return st;
}

void write_csv(std::ostream& os, const DecayStudy& study) {
  os << "# renormlab v1\n";
  os << "lambda,norm,theory_delta,fitted_slope\n";
  os.precision(17);
  for (std::size_t k = 0; k < study.lambdas.size(); ++k)
    os << study.lambdas[k] << ',' << study.norms[k] << ',' << study.theory_delta << ',' << study.fitted_slope << '\n';
}

RelaxationResiduals relaxation_residuals(const ParabolicSolution& sol, const TimeGridVector& b, double p) {
  const std::size_t count = sol.u.count();
  std::vector<double> drift(count), div(count);
  parallel_for(count, [&](std::size_t j) {
    const GridVector bj = b.sample(sol.u.times()[j]);
    const GridVector lu = sol.lambda * sol.u.slice(j);
    drift[j] = lp_norm((lu - bj).magnitude(), p);
    div[j] = lp_norm(divergence(lu) - divergence(bj), 1.0);
  });
  const double dt = sol.final_time / (static_cast<double>(count) - 1.0);
  return {time_norm(drift, dt, 1.0), time_norm(div, dt, 1.0)};
}

}  // namespace renormlab
