#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "renormlab/grid.hpp"
#include "renormlab/interpolate.hpp"
#include "renormlab/rng.hpp"
#include "renormlab/stats.hpp"

namespace renormlab {

/// Value and spatial derivatives of a vector field at an off-grid point.
struct FieldEval {
  Point value{0.0, 0.0};
  std::array<std::array<double, 2>, 2> jac{};  ///< d_j v_i
  double div = 0.0;
  double trace_sq = 0.0;  ///< d_i v_j d_j v_i
};

/// Time-dependent coefficient with cached spectral derivatives; evaluated by periodic cubic
/// interpolation in space and linear interpolation in time.
class CoefficientSampler {
 public:
  explicit CoefficientSampler(const TimeGridVector& field);
  const Grid& grid() const { return grid_; }
  FieldEval eval(double t, const CubicStencil& s, bool derivatives) const;

 private:
  struct Slice {
    std::vector<GridScalar> comps;
    std::vector<GridScalar> jac;  ///< row-major d_j v_i
  };
  void accumulate(const Slice& sl, double w, const CubicStencil& s, bool derivatives, FieldEval& out) const;

  Grid grid_{};
  std::vector<double> times_;
  std::vector<Slice> slices_;
  bool is_static_ = false;
};

struct SdeConfig {
  double dt = 1e-3;
  int mc_members = 1;
  std::uint64_t master_seed = 0;
};

/// Euler-Maruyama trajectories of every grid node under one shared Brownian path.
struct FlowEnsemble {
  Grid grid{};
  int start_step = 0;  ///< index of the first step on the path's grid
  int steps = 0;       ///< steps simulated from start_step
  double dt = 0.0;
  BrownianPath path;
  std::vector<double> positions;  ///< [(step * nodes + node) * dim + d], unwrapped coordinates
  std::vector<double> jacobians;  ///< [(step * nodes + node) * dim * dim + i * dim + j], empty until computed
  std::vector<double> logdets;    ///< [step * nodes + node], empty until computed

  std::size_t nodes() const { return grid.size(); }
  double time(int step) const { return (start_step + step) * dt; }
  Point position(int step, std::size_t node) const;
  /// log det of the variational Jacobian.
  double log_det_variational(int step, std::size_t node) const;
  double log_det_exponential(int step, std::size_t node) const {
    return logdets[static_cast<std::size_t>(step) * nodes() + node];
  }
};

/// X <- X + b(t, X) dt + sum_k sigma^k(t, X) dW^k from every node, all nodes sharing dW.
/// start_step > 0 starts the flow at time start_step * dt from the nodes (two-parameter flow).
FlowEnsemble simulate_flow(const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas,
                           const SdeConfig& config, const BrownianPath& path, int start_step = 0);

/// J <- (I + db dt + sum_k dsigma^k dW^k) J along each stored trajectory.
void variational_jacobian(FlowEnsemble& ensemble, const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas);

/// Left-point sums of d log det = Div b dt + Div sigma^k dW^k - 1/2 d_i sigma^k_j d_j sigma^k_i dt.
void logdet_stochastic_exponential(FlowEnsemble& ensemble, const TimeGridVector& b,
                                   const std::vector<TimeGridVector>& sigmas);

/// simulate_flow, variational_jacobian and logdet_stochastic_exponential for one ensemble member,
/// with the path drawn from stream_id(master_seed, member).
FlowEnsemble simulate_member(const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas,
                             const SdeConfig& config, std::uint64_t member);

/// Spatial inverse Psi_t sampled on the grid.
struct InverseMap {
  Grid grid{};
  std::vector<double> points;  ///< [node * dim + d], Psi_t(x_node)
  GridScalar det;              ///< det dPsi_t(x_node)
  int max_iterations = 0;
  bool used_fallback = false;

  Point point(std::size_t node) const;
};

/// Smallest signed cell volume of the piecewise-linear forward map (1-D segments, 2-D triangles)
/// relative to the undeformed cell; positive iff the sampled map preserves orientation everywhere.
double min_simplex_jacobian(const FlowEnsemble& ensemble, int step);

/// Newton inversion of the interpolated forward map, seeded at each node; det dPsi = 1 / det dPhi(Psi)
/// from the interpolated variational Jacobian (or the interpolant's derivative when absent).
InverseMap invert_flow(const FlowEnsemble& ensemble, int step);

/// f(t, x) = f0(Psi_t(x)) det dPsi_t(x).
GridScalar pushforward_solution(const GridScalar& f0, const InverseMap& inverse);
GridScalar pushforward_solution(const GridScalar& f0, const FlowEnsemble& ensemble, int step);

/// Monte Carlo mean of value^power with standard error, summed in index order.
MeanEstimate ensemble_moment(std::span<const double> functional_values, double power = 1.0);
MeanEstimate ensemble_moment(std::span<const FlowEnsemble> ensembles,
                             const std::function<double(const FlowEnsemble&)>& functional, double power = 1.0);

/// Constant C with E sup_t ||f(t)||_p^{2p} <= C ||f0||_p^{2p}:
/// C = 4 C1^2 exp((p-1)^2 int sum_k ||Div sigma^k||_inf^2),
/// C1 = exp(int (p-1)||Div b||_inf + (p-1)/2 ||sum_k d sigma^k d sigma^k||_inf + (p-1)^2/2 sum_k ||Div sigma^k||_inf^2).
/// Time integrals use the left-endpoint rule on `steps` intervals.
double moment_bound_constant(const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas, double p, int steps);

}  // namespace renormlab
