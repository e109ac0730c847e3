#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "renormlab/grid.hpp"
#include "renormlab/spectral.hpp"
#include "renormlab/weakform.hpp"

namespace renormlab {

/// phi_t = id + u(t, .) with ||grad u||_inf = lip < 1.
struct Diffeo {
  TimeGridVector u;
  std::vector<GridMatrix> grad;  ///< grad u per slice
  double lip = 0.0;              ///< max over slices and nodes of the operator norm of grad u
  double det_lo = 1.0;           ///< (1 - lip)^n
  double det_hi = 1.0;           ///< (1 + lip)^n
  double det_min = 1.0;          ///< measured min of det(I + grad u)
  double det_max = 1.0;          ///< measured max of det(I + grad u)

  bool brackets_determinant() const { return det_lo <= det_min && det_max <= det_hi; }
};

/// Throws LipTooLarge when lip >= 1.
Diffeo build_diffeo(const TimeGridVector& u);

struct DiffeoInversion {
  Point y{0.0, 0.0};
  int iterations = 0;
  double residual = 0.0;             ///< |y + u(t, y) - x|
  std::vector<double> error_ratios;  ///< |y_{k+1} - y_k| / |y_k - y_{k-1}|
};

/// Contraction y <- x - u(t, y) from y = x until |y + u(t, y) - x| <= tol; u interpolated cubically in
/// space and linearly in time. Throws InversionStagnation past log(tol)/log(lip) + 100 iterations.
DiffeoInversion invert_diffeo(const Diffeo& diffeo, double t, const Point& x, double tol = 1e-12);

/// Inverse image of every node at time t: [node * dim + d].
std::vector<double> invert_nodes(const Diffeo& diffeo, double t, double tol = 1e-12);

struct TransformedCoeffs {
  TimeGridVector b_hat;                  ///< lambda u(t, phi_t^{-1}(x))
  std::vector<TimeGridVector> sigma_hat; ///< column k of I + grad u at phi_t^{-1}(x)
};

/// Evaluated nodewise on every slice of u.
TransformedCoeffs transform_coeffs(const Diffeo& diffeo, double lambda);

/// h(x) = f(phi^{-1}(x)) / det(I + grad u)(phi^{-1}(x)).
GridScalar pushforward_under_diffeo(const GridScalar& f, const Diffeo& diffeo, double t);

/// g o phi_t^{-1}.
GridScalar compose_inverse(const GridScalar& g, const Diffeo& diffeo, double t);

/// det(I + grad u) at phi_t^{-1}(x) for every node.
GridScalar jacobian_det_at_inverse(const Diffeo& diffeo, double t);

/// Pushes each slice of fpath forward under phi at the path's step times and assembles the
/// weak-form ledger of the transformed equation with coefficients (b_hat, sigma_hat).
WeakFormLedger transformed_residual(std::span<const GridScalar> fpath, const Diffeo& diffeo,
                                    const TransformedCoeffs& coeffs, const TestFunction& phi,
                                    const BrownianPath& path);

struct RelaxationMetrics {
  double bhat_err = 0.0;        ///< ||b_hat - b||_{L^q_t(L^p)}
  double sigma_err = 0.0;       ///< sum_k ||sigma_hat^k - e_k||_{L^q_t(L^p)}
  double grad_sigma_err = 0.0;  ///< sum_k ||grad sigma_hat^k||_{L^q_t(L^r)}
  double div_err = 0.0;         ///< ||Div b_hat - Div b||_{L^1_t(L^1)}
};

/// Requires r < p.
RelaxationMetrics relaxation_metrics(const TransformedCoeffs& coeffs, const TimeGridVector& b, double q, double p,
                                     double r);

/// CSV with columns lambda,bhat_err,sigma_err,grad_sigma_err,div_err.
void write_relaxation_csv(std::ostream& os, const std::vector<double>& lambdas,
                          const std::vector<RelaxationMetrics>& metrics);

}  // namespace renormlab
