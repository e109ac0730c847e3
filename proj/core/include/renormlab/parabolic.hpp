#pragma once

#include <iosfwd>
#include <vector>

#include "renormlab/grid.hpp"

namespace renormlab {

/// Heat semigroup of the generator (1/2)Laplacian: Fourier multiplier exp(-|k|^2 t / 2).
GridScalar heat_apply(const GridScalar& g, double t);
GridVector heat_apply(const GridVector& g, double t);

struct MildSolveOptions {
  int quad_steps = 512;
  double tol = 1e-10;
  int max_iter = 200;
};

/// u_lambda of -du/dt = (1/2)Lap u - lambda u + b + b.grad u on [0, T], u(T) = 0,
/// stored in backward (physical) time on the uniform quadrature grid.
struct ParabolicSolution {
  double lambda = 0.0;
  double final_time = 0.0;
  TimeGridVector u;
  int iterations = 0;
  double residual = 0.0;              ///< last sup-norm Picard defect
  std::vector<double> defects;        ///< defect per Picard iteration
  double contraction_estimate = 0.0;  ///< n sqrt(2/lambda) ||b||_inf
  bool contraction_warning = false;   ///< contraction_estimate >= 1
};

/// Picard iteration on the time-reversed mild form, starting from zero. The Duhamel integral freezes the
/// forcing b + b.grad u at the left endpoint of each step and integrates the damped heat kernel exactly
/// per Fourier mode. Throws NotConverged when max_iter is reached.
ParabolicSolution mild_solve(const TimeGridVector& b, double lambda, const MildSolveOptions& options = {});

/// Sup-norm distance between the solution and one further application of the mild map.
double mild_map_defect(const ParabolicSolution& sol, const TimeGridVector& b);

/// Space-time L2 norm of the forward-form residual dv/ds - b.grad v - (1/2)Lap v + lambda v - b,
/// with v(s) = u(T - s), a forward difference in time and the spatial terms averaged over each step.
double pde_residual(const ParabolicSolution& sol, const TimeGridVector& b);

/// Pointwise magnitude of grad^alpha u at one slice (alpha in {0,1,2}, Frobenius over all indices).
GridScalar derivative_magnitude(const GridVector& u, int alpha);

struct DecayStudy {
  int alpha = 0;
  double r = 2.0;
  double p = 2.0;
  double q = 2.0;
  int dim = 1;
  std::vector<double> lambdas;
  std::vector<double> norms;  ///< ||grad^alpha u_lambda||_{L^q_t(L^r)}
  double fitted_slope = 0.0;
  double theory_delta = 0.0;  ///< 1 - alpha/2 + (n/2)(1/r - 1/p)
  double tolerance = 0.15;

  /// slope <= -theory_delta + tolerance
  bool decays_at_rate() const { return fitted_slope <= -theory_delta + tolerance; }
  /// |slope + theory_delta| <= tolerance
  bool matches_rate() const;
};

/// Requires alpha in {0,1} with r <= p, or alpha = 2 with r < p; p, q with 2/q + n/p < 1; at least three
/// increasing lambdas.
DecayStudy decay_study(const TimeGridVector& b, const std::vector<double>& lambdas, int alpha, double r, double p,
                       double q, const MildSolveOptions& options = {});

/// CSV with columns lambda,norm,theory_delta,fitted_slope.
void write_csv(std::ostream& os, const DecayStudy& study);

struct RelaxationResiduals {
  double drift = 0.0;       ///< ||lambda u - b||_{L^1_t(L^p)}
  double divergence = 0.0;  ///< ||Div(lambda u) - Div b||_{L^1_t(L^1)}
};

RelaxationResiduals relaxation_residuals(const ParabolicSolution& sol, const TimeGridVector& b, double p);

}  // namespace renormlab
