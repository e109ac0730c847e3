#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "renormlab/grid.hpp"
#include "renormlab/mollifier.hpp"
#include "renormlab/renormalizer.hpp"

namespace renormlab {

/// Sign of the first-order commutator limit: T_{sigma,eps}(f) -> kTLimitSign (Div sigma) f.
/// Fixed by the smooth-case expansion sigma.grad f - Div(sigma f) = -(Div sigma) f.
inline constexpr double kTLimitSign = -1.0;

enum class CommutatorOp { T, S, TDrift };
std::string to_string(CommutatorOp op);

/// sigma.grad(f_eps) - (Div(sigma f))_eps.
GridScalar op_T(const GridVector& sigma, const GridScalar& f, double epsilon);
/// L_sigma f_eps - grad_sigma (Div_sigma f)_eps + (L*_sigma f)_eps with
/// L_sigma g = 1/2 sigma_i sigma_j d_i d_j g and L*_sigma f = 1/2 d_i d_j (sigma_i sigma_j f).
GridScalar op_S(const GridVector& sigma, const GridScalar& f, double epsilon);
/// The drift commutator has the same form as op_T with b in place of sigma.
GridScalar op_T_drift(const GridVector& b, const GridScalar& f, double epsilon);

struct CommutatorLimits {
  GridScalar t_limit;  ///< kTLimitSign (Div sigma) f
  GridScalar s_limit;  ///< 1/2 (d_i sigma_j d_j sigma_i + (Div sigma)^2) f
};
CommutatorLimits commutator_limits(const GridVector& sigma, const GridScalar& f);

/// Lebesgue exponents of the uniform bounds: 1/r = m/q + 1/p with m = 1 (T) or 2 (S).
struct BoundExponents {
  double p = 2.0;
  double q = 4.0;
  double r = 4.0 / 3.0;
};

struct CommutatorStudy {
  CommutatorOp op = CommutatorOp::T;
  std::vector<double> epsilons;
  std::vector<double> errors;        ///< ||op - limit||_{L^r(K)}
  std::vector<double> bound_ratios;  ///< ||op||_{L^r(K)} / (||grad sigma||^m_{L^q(K_eps)} ||f||_{L^p(K_eps)})
  double fitted_rate = 0.0;
  double bound_constant = 0.0;  ///< max bound ratio over the study
  double limit_sign = kTLimitSign;
  bool degenerate_zero = false;
};

/// Requires at least three strictly decreasing epsilons; r must match (p, q) for the operator.
CommutatorStudy convergence_study(CommutatorOp op, const GridVector& sigma, const GridScalar& f,
                                  const std::vector<double>& epsilons, const BoundExponents& exps,
                                  const Region& region = Region::whole_box());

/// CSV with columns epsilon,error_Lr,bound_ratio.
void write_csv(std::ostream& os, const CommutatorStudy& study);

/// Numerical check of the two remainder identities of the renormalization argument.
/// Residuals are sup-norm differences relative to the sup norm of the defining remainder.
struct RemainderIdentities {
  /// R1 = Div_sigma Gamma(f_eps) - Gamma'(f_eps)(Div_sigma f)_eps versus Gamma'(f_eps) T +/- (Div sigma) Gamma(f_eps).
  double r1_residual_plus = 0.0;
  double r1_residual_minus = 0.0;
  int r1_sign = 0;  ///< sign whose reconstruction passes, 0 if neither or both
  /// R2 = Gamma'(f_eps)(L* f)_eps - L* Gamma(f_eps) + 1/2 Gamma''(f_eps)(Div_sigma f)_eps^2 versus
  /// Gamma' S + 1/2 Gamma'' T^2 + s grad_sigma(Gamma' T) - grad_sigma((Div sigma) Gamma)
  ///   - 1/2 Gamma d_i sigma_j d_j sigma_i - 1/2 Gamma (Div sigma)^2 for s = +1, -1.
  double r2_residual_plus = 0.0;
  double r2_residual_minus = 0.0;
  int r2_sign = 0;
  /// Closed form written with Div_sigma R1 terms and the opposite sign on grad_sigma(Gamma' T);
  /// reported for reference only.
  double r2_residual_alternate = 0.0;
  double tolerance = 1e-6;
};

RemainderIdentities remainder_identities(const GridVector& sigma, const GridScalar& f, const Renormalizer& gamma,
                                         double epsilon, double tolerance = 1e-6);

}  // namespace renormlab
