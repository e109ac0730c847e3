#include "renormlab/weakform.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "renormlab/error.hpp"
#include "renormlab/mollifier.hpp"
#include "renormlab/parallel.hpp"
#include "renormlab/spectral.hpp"

namespace renormlab {

namespace {

/// Pairing weights of every term at one instant; each term is <F(f), weight>.
struct TermWeights {
  GridScalar drift;                    ///< b.grad phi
  GridScalar diffusion;                ///< 1/2 sum_k sigma^k sigma^k : D^2 phi
  std::vector<GridScalar> transport;   ///< sigma^k.grad phi
  std::vector<GridScalar> div_sigma;   ///< (Div sigma^k) phi
  GridScalar div_b;                    ///< (Div b) phi
  GridScalar div_sigma_transport;      ///< sum_k (Div sigma^k) sigma^k.grad phi
  GridScalar trace;                    ///< 1/2 sum_k d sigma^k d sigma^k phi
  GridScalar div_sigma_sq;             ///< 1/2 sum_k (Div sigma^k)^2 phi
};

struct PhiDerivatives {
  GridVector grad;
  std::array<std::array<GridScalar, 2>, 2> hess;
};

PhiDerivatives phi_derivatives(const GridScalar& phi) {
  PhiDerivatives d;
  const Spectrum s = forward_fft(phi);
  d.grad = GridVector(phi.grid());
  for (int i = 0; i < phi.grid().dim; ++i) {
    d.grad[i] = spectral_derivative(s, MultiIndex::axis(i));
    for (int j = 0; j < phi.grid().dim; ++j) d.hess[i][j] = spectral_derivative(s, MultiIndex::pair(i, j));
  }
  return d;
}

TermWeights weights_at(double t, const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas,
                       const GridScalar& phi, const PhiDerivatives& dphi, bool renormalized) {
  const Grid& g = phi.grid();
  const int n = g.dim;
  TermWeights w;
  const GridVector bt = b.sample(t);
  w.drift = dot(bt, dphi.grad);
  w.diffusion = GridScalar(g);
  if (renormalized) {
    w.div_b = divergence(bt) * phi;
    w.div_sigma_transport = GridScalar(g);
    w.trace = GridScalar(g);
    w.div_sigma_sq = GridScalar(g);
  }
  for (const auto& sk : sigmas) {
    const GridVector s = sk.sample(t);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) w.diffusion += s[i] * s[j] * dphi.hess[i][j];
    GridScalar tr = dot(s, dphi.grad);
    if (renormalized) {
      const GridMatrix m = jacobian(s);
      const GridScalar div = m.trace();
      w.div_sigma.push_back(div * phi);
      w.div_sigma_transport += div * tr;
      w.trace += m.trace_of_square() * phi;
      w.div_sigma_sq += div * div * phi;
    }
    w.transport.push_back(std::move(tr));
  }
  w.diffusion *= 0.5;
  if (renormalized) {
    w.trace *= 0.5;
    w.div_sigma_sq *= 0.5;
  }
  return w;
}

void check_path_inputs(std::span<const GridScalar> fpath, const TimeGridVector& b,
                       const std::vector<TimeGridVector>& sigmas, const TestFunction& phi, const BrownianPath& path) {
  if (fpath.size() != static_cast<std::size_t>(path.steps) + 1) {
    std::ostringstream os;
    os << "fpath has " << fpath.size() << " slices but the path has " << path.steps + 1 << " step boundaries";
    fail(ErrorCode::BadTimeGrid, os.str());
  }
  if (path.k_count != static_cast<int>(sigmas.size())) fail(ErrorCode::BadIndex, "path and sigmas disagree on k");
  if (std::abs(b.final_time() - path.final_time) > 1e-12 * path.final_time)
    fail(ErrorCode::BadTimeGrid, "coefficient horizon differs from the path horizon");
  for (const auto& f : fpath) require_same_grid(f.grid(), phi.values.grid(), "weak form");
  require_same_grid(b.grid(), phi.values.grid(), "weak form");
  for (const auto& s : sigmas) require_same_grid(s.grid(), phi.values.grid(), "weak form");
}

bool all_static(const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas) {
  if (!b.is_static()) return false;
  for (const auto& s : sigmas)
    if (!s.is_static()) return false;
  return true;
}

/// Per-step term contributions, computed in parallel and summed in step order.
template <class StepFn>
std::vector<double> sum_over_steps(const BrownianPath& path, std::size_t term_count, StepFn&& step_fn) {
  const auto steps = static_cast<std::size_t>(path.steps);
  std::vector<std::vector<double>> per_step(steps, std::vector<double>(term_count, 0.0));
  parallel_for(steps, [&](std::size_t n) { step_fn(static_cast<int>(n), per_step[n]); });
  std::vector<double> totals(term_count, 0.0);
  for (const auto& row : per_step)
    for (std::size_t k = 0; k < term_count; ++k) totals[k] += row[k];
  return totals;
}

WeakFormLedger finish(std::vector<std::string> names, const std::vector<double>& totals, double lhs_delta,
                      const std::string& flipped) {
  WeakFormLedger ledger;
  ledger.lhs_delta = lhs_delta;
  double sum = 0.0;
  bool found = flipped.empty();
  for (std::size_t k = 0; k < names.size(); ++k) {
    double v = totals[k];
    if (names[k] == flipped) {
      v = -v;
      found = true;
    }
    ledger.terms.emplace_back(names[k], v);
    sum += v;
  }
  if (!found) fail(ErrorCode::BadIndex, "unknown term name '" + flipped + "'");
  ledger.residual = lhs_delta - sum;
  return ledger;
}

}  // namespace

TestFunction bump_test_function(const Grid& grid, const Point& center, double radius) {
  if (!(radius > 0.0)) fail(ErrorCode::SupportViolation, "test function radius must be positive");
  const double lo = 0.25 * grid.length, hi = 0.75 * grid.length;
  for (int d = 0; d < grid.dim; ++d)
    if (center[d] - radius < lo - 1e-12 || center[d] + radius > hi + 1e-12) {
      std::ostringstream os;
      os << "ball of radius " << radius << " around the center leaves the central half-box [" << lo << ", " << hi << "]";
      fail(ErrorCode::SupportViolation, os.str());
    }
  TestFunction tf{center, radius, GridScalar(grid)};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.node(k);
    double r2 = 0.0;
    for (int d = 0; d < grid.dim; ++d) {
      const double dx = wrap_difference(x[d], center[d], grid.length);
      r2 += dx * dx;
    }
    r2 /= radius * radius;
    tf.values[k] = r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
  }
  return tf;
}

double WeakFormLedger::term(const std::string& name) const {
  for (const auto& [k, v] : terms)
    if (k == name) return v;
  fail(ErrorCode::BadIndex, "ledger has no term '" + name + "'");
}

void write_csv(std::ostream& os, const WeakFormLedger& ledger) {
  os << "# renormlab v1\n";
  os << "term_name,value\n";
  os.precision(17);
  for (const auto& [name, v] : ledger.terms) os << name << ',' << v << '\n';
  os << "lhs_delta," << ledger.lhs_delta << '\n';
  os << "residual," << ledger.residual << '\n';
}

WeakFormLedger residual_original(std::span<const GridScalar> fpath, const TimeGridVector& b,
                                 const std::vector<TimeGridVector>& sigmas, const TestFunction& phi,
                                 const BrownianPath& path) {
  check_path_inputs(fpath, b, sigmas, phi, path);
  const PhiDerivatives dphi = phi_derivatives(phi.values);
  const bool fixed = all_static(b, sigmas);
  TermWeights shared;
  if (fixed) shared = weights_at(0.0, b, sigmas, phi.values, dphi, false);
  const double dt = path.dt;
  const auto totals = sum_over_steps(path, 3, [&](int n, std::vector<double>& out) {
    const TermWeights local = fixed ? TermWeights{} : weights_at(n * dt, b, sigmas, phi.values, dphi, false);
    const TermWeights& w = fixed ? shared : local;
    const GridScalar& f = fpath[static_cast<std::size_t>(n)];
    out[0] = inner(f, w.drift) * dt;
    out[1] = inner(f, w.diffusion) * dt;
    for (std::size_t k = 0; k < sigmas.size(); ++k)
      out[2] += inner(f, w.transport[k]) * path.increment(n, static_cast<int>(k));
  });
  const double lhs = inner(fpath.back(), phi.values) - inner(fpath.front(), phi.values);
  return finish({"drift", "diffusion", "ito_transport"}, totals, lhs, "");
}

const std::vector<std::string>& renormalized_term_names() {
  static const std::vector<std::string> names = {
      "drift",        "diffusion",        "ito_transport", "ito_G_div_sigma", "G_div_b", "G_div_sigma_transport",
      "G_dsigma_dsigma", "H_div_sigma_sq"};
  return names;
}

WeakFormLedger residual_renormalized(std::span<const GridScalar> fpath, const TimeGridVector& b,
                                     const std::vector<TimeGridVector>& sigmas, const TestFunction& phi,
                                     const Renormalizer& gamma, const BrownianPath& path,
                                     const RenormalizedOptions& options) {
  check_path_inputs(fpath, b, sigmas, phi, path);
  const PhiDerivatives dphi = phi_derivatives(phi.values);
  const bool fixed = all_static(b, sigmas);
  TermWeights shared;
  if (fixed) shared = weights_at(0.0, b, sigmas, phi.values, dphi, true);
  const double dt = path.dt;
  const auto totals = sum_over_steps(path, 8, [&](int n, std::vector<double>& out) {
    const TermWeights local = fixed ? TermWeights{} : weights_at(n * dt, b, sigmas, phi.values, dphi, true);
    const TermWeights& w = fixed ? shared : local;
    const GridScalar& f = fpath[static_cast<std::size_t>(n)];
    const GridScalar G0 = gamma.gamma(f);
    const GridScalar Gf = gamma.g(f);
    const GridScalar Hf = gamma.h(f);
    out[0] = inner(G0, w.drift) * dt;
    out[1] = inner(G0, w.diffusion) * dt;
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
      const double dw = path.increment(n, static_cast<int>(k));
      out[2] += inner(G0, w.transport[k]) * dw;
      out[3] -= inner(Gf, w.div_sigma[k]) * dw;
    }
    out[4] = -inner(Gf, w.div_b) * dt;
    out[5] = -inner(Gf, w.div_sigma_transport) * dt;
    out[6] = inner(Gf, w.trace) * dt;
    out[7] = inner(Hf, w.div_sigma_sq) * dt;
  });
  const double lhs = inner(gamma.gamma(fpath.back()), phi.values) - inner(gamma.gamma(fpath.front()), phi.values);
  return finish(renormalized_term_names(), totals, lhs, options.flipped_term);
}

void write_refinement_csv(std::ostream& os, const std::vector<RefinementRow>& rows) {
  os << "# renormlab v1\n";
  os << "dt,h,epsilon,residual\n";
  os.precision(17);
  for (const auto& r : rows) os << r.dt << ',' << r.h << ',' << r.epsilon << ',' << r.residual << '\n';
}

GridScalar stability_weight(const Grid& grid, const StabilityOptions& options) {
  if (options.unit_weight) return GridScalar(grid, 1.0);
  if (!(options.r_exponent > grid.dim)) fail(ErrorCode::BadExponent, "stability weight needs r > n");
  return GridScalar::sample(grid, [&](const Point& x) {
    const Point y = offset_from_center(grid, x);
    return std::pow(1.0 + y[0] * y[0] + y[1] * y[1], -0.5 * options.r_exponent);
  });
}

StabilitySeries weighted_l1_stability(const GridScalar& f0, std::size_t members,
                                      const std::function<FlowEnsemble(std::size_t)>& make_member,
                                      const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas,
                                      const StabilityOptions& options) {
  if (members == 0) fail(ErrorCode::EmptyEnsemble, "weighted_l1_stability needs at least one ensemble");
  if (options.stride < 1) fail(ErrorCode::BadIndex, "stride must be positive");
  const Grid& g = f0.grid();
  const GridScalar w = stability_weight(g, options);

  // Sample the first member to learn the step grid.
  std::vector<std::vector<double>> values(members);
  std::vector<int> sample_steps;
  double dt = 0.0;
  parallel_for(members, [&](std::size_t m) {
    const FlowEnsemble e = make_member(m);
    std::vector<int> local_steps;
    for (int s = 0; s <= e.steps; s += options.stride) local_steps.push_back(s);
    if (local_steps.back() != e.steps) local_steps.push_back(e.steps);
    std::vector<double>& v = values[m];
    for (int s : local_steps) v.push_back(inner(w, pushforward_solution(f0, e, s).map([](double z) { return std::abs(z); })));
    if (m == 0) {
      sample_steps = local_steps;
      dt = e.dt;
    }
  });

  StabilitySeries out;
  const double r = options.unit_weight ? 0.0 : options.r_exponent;
  out.c1 = 0.5 * (1.0 + std::numbers::sqrt2) * r;
  out.c2 = r * (r + 3.0);
  const double w0 = inner(w, f0.map([](double z) { return std::abs(z); }));
  const GridScalar radial = GridScalar::sample(g, [&](const Point& x) {
    const Point y = offset_from_center(g, x);
    return 1.0 / (1.0 + std::sqrt(y[0] * y[0] + y[1] * y[1]));
  });
  auto rate = [&](double t) {
    double s = out.c1 * (b.sample(t).magnitude() * radial).max_abs();
    for (const auto& sk : sigmas) {
      const double m = (sk.sample(t).magnitude() * radial).max_abs();
      s += out.c2 * m * m;
    }
    return s;
  };
  double integral = 0.0;
  int done = 0;
  for (std::size_t idx = 0; idx < sample_steps.size(); ++idx) {
    const int s = sample_steps[idx];
    for (; done < s; ++done) integral += rate(done * dt) * dt;
    std::vector<double> column(members);
    for (std::size_t m = 0; m < members; ++m) column[m] = values[m][idx];
    const MeanEstimate est = mean_and_stderr(column);
    out.times.push_back(s * dt);
    out.mean.push_back(est.mean);
    out.stderr_.push_back(est.stderr_);
    out.envelope.push_back(w0 * std::exp(integral));
  }
  return out;
}

StabilitySeries weighted_l1_stability(const GridScalar& f0, std::span<const FlowEnsemble> ensembles,
                                      const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas,
                                      const StabilityOptions& options) {
  return weighted_l1_stability(
      f0, ensembles.size(), [&](std::size_t m) { return ensembles[m]; }, b, sigmas, options);
}

}  // namespace renormlab
