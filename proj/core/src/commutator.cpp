#include "renormlab/commutator.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "renormlab/error.hpp"
#include "renormlab/parallel.hpp"
#include "renormlab/spectral.hpp"
#include "renormlab/stats.hpp"

namespace renormlab {

namespace {

void check_operands(const GridVector& sigma, const GridScalar& f) {
  require_same_grid(sigma.grid(), f.grid(), "commutator");
}

/// sigma . grad g
GridScalar along(const GridVector& sigma, const GridScalar& g) { return dot(sigma, gradient(g)); }

/// Div(sigma f)
GridScalar div_along(const GridVector& sigma, const GridScalar& f) {
  GridScalar out(f.grid());
  for (int i = 0; i < sigma.dim(); ++i) out += spectral_derivative(sigma[i] * f, MultiIndex::axis(i));
  return out;
}

/// 1/2 sigma_i sigma_j d_i d_j g
GridScalar generator(const GridVector& sigma, const GridScalar& g) {
  const Spectrum s = forward_fft(g);
  GridScalar out(g.grid());
  for (int i = 0; i < sigma.dim(); ++i)
    for (int j = 0; j < sigma.dim(); ++j) out += sigma[i] * sigma[j] * spectral_derivative(s, MultiIndex::pair(i, j));
  return 0.5 * out;
}

/// 1/2 d_i d_j (sigma_i sigma_j f)
GridScalar adjoint_generator(const GridVector& sigma, const GridScalar& f) {
  GridScalar out(f.grid());
  for (int i = 0; i < sigma.dim(); ++i)
    for (int j = 0; j < sigma.dim(); ++j)
      out += spectral_derivative(sigma[i] * sigma[j] * f, MultiIndex::pair(i, j));
  return 0.5 * out;
}

double relative_sup(const GridScalar& a, const GridScalar& b) {
  const double scale = std::max(b.max_abs(), std::numeric_limits<double>::min());
  return (a - b).max_abs() / scale;
}

/// Enlarges a sub-box by eps per side; the whole box stays whole.
Region enlarged(const Region& region, const Grid& grid, double eps) {
  if (region.whole) return region;
  Region out = region;
  for (int d = 0; d < grid.dim; ++d) {
    out.lo[d] -= eps;
    out.hi[d] += eps;
  }
  if (out.lo[0] <= 0.0 && out.hi[0] >= grid.length - grid.spacing() &&
      (grid.dim == 1 || (out.lo[1] <= 0.0 && out.hi[1] >= grid.length - grid.spacing())))
    return Region::whole_box();
  return out;
}

}  // namespace

std::string to_string(CommutatorOp op) {
  switch (op) {
    case CommutatorOp::T: return "T";
    case CommutatorOp::S: return "S";
    case CommutatorOp::TDrift: return "T_drift";
  }
  return "unknown";
}

GridScalar op_T(const GridVector& sigma, const GridScalar& f, double epsilon) {
  check_operands(sigma, f);
  const MollifierKernel k = mollifier(f.grid(), epsilon);
  return along(sigma, convolve(f, k)) - convolve(div_along(sigma, f), k);
}

GridScalar op_S(const GridVector& sigma, const GridScalar& f, double epsilon) {
  check_operands(sigma, f);
  const MollifierKernel k = mollifier(f.grid(), epsilon);
  return generator(sigma, convolve(f, k)) - along(sigma, convolve(div_along(sigma, f), k)) +
         convolve(adjoint_generator(sigma, f), k);
}

GridScalar op_T_drift(const GridVector& b, const GridScalar& f, double epsilon) { return op_T(b, f, epsilon); }

CommutatorLimits commutator_limits(const GridVector& sigma, const GridScalar& f) {
  check_operands(sigma, f);
  const GridMatrix ds = jacobian(sigma);
  const GridScalar div = ds.trace();
  CommutatorLimits out;
  out.t_limit = kTLimitSign * (div * f);
  out.s_limit = 0.5 * ((ds.trace_of_square() + div * div) * f);
  return out;
}

CommutatorStudy convergence_study(CommutatorOp op, const GridVector& sigma, const GridScalar& f,
                                  const std::vector<double>& epsilons, const BoundExponents& exps,
                                  const Region& region) {
  check_operands(sigma, f);
  if (epsilons.size() < 3) fail(ErrorCode::TooFewSamples, "convergence study needs at least three epsilons");
  for (std::size_t k = 1; k < epsilons.size(); ++k)
    if (!(epsilons[k] < epsilons[k - 1])) fail(ErrorCode::BadIndex, "epsilons must be strictly decreasing");
  const double m = (op == CommutatorOp::S) ? 2.0 : 1.0;
  if (!(exps.p >= 1.0) || !(exps.q >= 1.0) || !(exps.r >= 1.0) ||
      std::abs(1.0 / exps.r - (m / exps.q + 1.0 / exps.p)) > 1e-12)
    fail(ErrorCode::BadExponent, "r must satisfy 1/r = m/q + 1/p for the chosen operator");
  for (double e : epsilons) (void)mollifier(f.grid(), e);  // range check up front

  const CommutatorLimits lim = commutator_limits(sigma, f);
  const GridScalar& limit = (op == CommutatorOp::S) ? lim.s_limit : lim.t_limit;
  const GridScalar grad_norm = jacobian(sigma).frobenius();

  CommutatorStudy st;
  st.op = op;
  st.epsilons = epsilons;
  st.errors.assign(epsilons.size(), 0.0);
  st.bound_ratios.assign(epsilons.size(), 0.0);
  parallel_for(epsilons.size(), [&](std::size_t k) {
    const double eps = epsilons[k];
    const GridScalar value = (op == CommutatorOp::S) ? op_S(sigma, f, eps) : op_T(sigma, f, eps);
    st.errors[k] = lp_norm(value - limit, exps.r, region);
    const Region outer = enlarged(region, f.grid(), eps);
    const double numerator = lp_norm(value, exps.r, region);
    const double denominator = std::pow(lp_norm(grad_norm, exps.q, outer), m) * lp_norm(f, exps.p, outer);
    st.bound_ratios[k] = (numerator <= 1e-12 || denominator <= 0.0) ? 0.0 : numerator / denominator;
  });

  st.degenerate_zero = true;
  for (double e : st.errors) st.degenerate_zero = st.degenerate_zero && e <= 1e-9;
  for (double r : st.bound_ratios) st.bound_constant = std::max(st.bound_constant, r);
  if (!st.degenerate_zero) {
    bool positive = true;
    for (double e : st.errors) positive = positive && e > 0.0;
    st.fitted_rate = positive ? loglog_slope(st.epsilons, st.errors) : std::numeric_limits<double>::quiet_NaN();
  }
  return st;
}

void write_csv(std::ostream& os, const CommutatorStudy& study) {
  os << "# renormlab v1\n";
  os << "epsilon,error_Lr,bound_ratio\n";
  os.precision(17);
  for (std::size_t k = 0; k < study.epsilons.size(); ++k)
    os << study.epsilons[k] << ',' << study.errors[k] << ',' << study.bound_ratios[k] << '\n';
}

RemainderIdentities remainder_identities(const GridVector& sigma, const GridScalar& f, const Renormalizer& gamma,
                                         double epsilon, double tolerance) {
  check_operands(sigma, f);
  const MollifierKernel k = mollifier(f.grid(), epsilon);
  const GridScalar fe = convolve(f, k);
  const GridScalar G0 = gamma.gamma(fe);
  const GridScalar G1 = gamma.d1(fe);
  const GridScalar G2 = gamma.d2(fe);
  const GridMatrix ds = jacobian(sigma);
  const GridScalar div = ds.trace();
  const GridScalar dsds = ds.trace_of_square();
  const GridScalar T = op_T(sigma, f, epsilon);
  const GridScalar S = op_S(sigma, f, epsilon);
  const GridScalar div_sigma_f_eps = convolve(div_along(sigma, f), k);

  RemainderIdentities out;
  out.tolerance = tolerance;

  const GridScalar r1 = div_along(sigma, G0) - G1 * div_sigma_f_eps;
  const GridScalar r1_base = G1 * T;
  out.r1_residual_plus = relative_sup(r1_base + div * G0, r1);
  out.r1_residual_minus = relative_sup(r1_base - div * G0, r1);
  const bool r1p = out.r1_residual_plus <= tolerance, r1m = out.r1_residual_minus <= tolerance;
  out.r1_sign = (r1p != r1m) ? (r1p ? 1 : -1) : 0;

  const GridScalar r2 = G1 * convolve(adjoint_generator(sigma, f), k) - adjoint_generator(sigma, G0) +
                        0.5 * (G2 * div_sigma_f_eps * div_sigma_f_eps);
  const GridScalar common = G1 * S + 0.5 * (G2 * T * T) - along(sigma, div * G0) - 0.5 * (G0 * dsds) -
                            0.5 * (G0 * div * div);
  const GridScalar transport = along(sigma, G1 * T);
  out.r2_residual_plus = relative_sup(common + transport, r2);
  out.r2_residual_minus = relative_sup(common - transport, r2);
  const bool r2p = out.r2_residual_plus <= tolerance, r2m = out.r2_residual_minus <= tolerance;
  out.r2_sign = (r2p != r2m) ? (r2p ? 1 : -1) : 0;

  // Gamma' S - 1/2 Gamma dsds - 1/2 Gamma' (Div sigma) T + 1/2 Gamma'' T^2 + Div_sigma R1 - 1/2 (Div sigma) R1
  const GridScalar alternate = G1 * S - 0.5 * (G0 * dsds) - 0.5 * (G1 * div * T) + 0.5 * (G2 * T * T) +
                               div_along(sigma, r1) - 0.5 * (div * r1);
  out.r2_residual_alternate = relative_sup(alternate, r2);
  return out;
}

}  // namespace renormlab
