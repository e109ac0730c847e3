#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "renormlab/flow.hpp"
#include "renormlab/grid.hpp"
#include "renormlab/renormalizer.hpp"
#include "renormlab/rng.hpp"

namespace renormlab {

/// Smooth compactly supported bump exp(1 - 1/(1 - |x - c|^2 / radius^2)), peak value 1.
struct TestFunction {
  Point center{0.0, 0.0};
  double radius = 0.0;
  GridScalar values;
};

/// Requires the ball to lie inside the central half-box [L/4, 3L/4]^n.
TestFunction bump_test_function(const Grid& grid, const Point& center, double radius);

/// Time integrals of the terms of a weak form and the residual lhs_delta - sum(terms).
struct WeakFormLedger {
  std::vector<std::pair<std::string, double>> terms;
  double lhs_delta = 0.0;
  double residual = 0.0;

  double term(const std::string& name) const;
};

/// CSV rows (term_name, value), then lhs_delta and residual rows.
void write_csv(std::ostream& os, const WeakFormLedger& ledger);

/// <f(t), phi> - <f(0), phi> against drift <f, b.grad phi>, diffusion 1/2 <sigma_i sigma_j f, d_i d_j phi>
/// and Ito sum_k <f, sigma^k.grad phi> dW^k, all at left endpoints. fpath holds one field per path step boundary.
WeakFormLedger residual_original(std::span<const GridScalar> fpath, const TimeGridVector& b,
                                 const std::vector<TimeGridVector>& sigmas, const TestFunction& phi,
                                 const BrownianPath& path);

/// Term names of the renormalized weak form, in ledger order.
const std::vector<std::string>& renormalized_term_names();

struct RenormalizedOptions {
  /// Name of a term whose sign is reversed before summation (diagnostics only); empty for none.
  std::string flipped_term;
};

/// <Gamma(f(t)), phi> - <Gamma(f(0)), phi> against
///   <Gamma, b.grad phi> + 1/2 <Gamma sigma sigma, D^2 phi> + <Gamma, sigma.grad phi> dW - <G Div sigma, phi> dW
///   - <G Div b, phi> - <G Div sigma, sigma.grad phi> + 1/2 <G d sigma d sigma, phi> + 1/2 <H (Div sigma)^2, phi>.
WeakFormLedger residual_renormalized(std::span<const GridScalar> fpath, const TimeGridVector& b,
                                     const std::vector<TimeGridVector>& sigmas, const TestFunction& phi,
                                     const Renormalizer& gamma, const BrownianPath& path,
                                     const RenormalizedOptions& options = {});

/// One row of a refinement study.
struct RefinementRow {
  double dt = 0.0;
  double h = 0.0;
  double epsilon = 0.0;
  double residual = 0.0;
};
void write_refinement_csv(std::ostream& os, const std::vector<RefinementRow>& rows);

struct StabilityOptions {
  double r_exponent = 3.0;  ///< weight (1 + |x|^2)^(-r/2), |x| from the box center; needs r > n
  bool unit_weight = false; ///< w = 1 (torus mode)
  int stride = 1;           ///< evaluate every stride-th step
};

struct StabilitySeries {
  std::vector<double> times;
  std::vector<double> mean;     ///< E int w |f(t)|
  std::vector<double> stderr_;
  std::vector<double> envelope; ///< int w |f0| exp(int c1 ||b/(1+|x|)||_inf + c2 sum_k ||sigma^k/(1+|x|)||_inf^2)
  double c1 = 0.0;
  double c2 = 0.0;
};

GridScalar stability_weight(const Grid& grid, const StabilityOptions& options);

/// Monte Carlo estimate over `members` ensembles produced on demand by make_member(index).
StabilitySeries weighted_l1_stability(const GridScalar& f0, std::size_t members,
                                      const std::function<FlowEnsemble(std::size_t)>& make_member,
                                      const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas,
                                      const StabilityOptions& options = {});
StabilitySeries weighted_l1_stability(const GridScalar& f0, std::span<const FlowEnsemble> ensembles,
                                      const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas,
                                      const StabilityOptions& options = {});

}  // namespace renormlab
