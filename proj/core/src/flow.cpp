#include "renormlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "renormlab/error.hpp"
#include "renormlab/parallel.hpp"
#include "renormlab/spectral.hpp"

namespace renormlab {

namespace {

constexpr int kMaxNewton = 50;

void check_coefficients(const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas) {
  for (const auto& s : sigmas) require_same_grid(b.grid(), s.grid(), "flow coefficients");
}

std::vector<CoefficientSampler> samplers_for(const std::vector<TimeGridVector>& sigmas) {
  std::vector<CoefficientSampler> out;
  out.reserve(sigmas.size());
  for (const auto& s : sigmas) out.emplace_back(s);
  return out;
}

[[noreturn]] void trajectory_failure(int step, std::size_t node) {
  std::ostringstream os;
  os << "non-finite or runaway trajectory at step " << step << ", node " << node;
  fail(ErrorCode::TrajectoryFailure, os.str());
}

double det2(const std::array<std::array<double, 2>, 2>& m, int dim) {
  return dim == 1 ? m[0][0] : m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

}  // namespace

// ------------------------------------------------------------ CoefficientSampler

CoefficientSampler::CoefficientSampler(const TimeGridVector& field)
    : grid_(field.grid()), times_(field.times()), is_static_(field.is_static()) {
  const std::size_t count = is_static_ ? 1 : field.count();
  slices_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const GridVector& v = field.slice(k);
    Slice& sl = slices_[k];
    sl.comps = v.components();
    const GridMatrix m = jacobian(v);
    for (int i = 0; i < grid_.dim; ++i)
      for (int j = 0; j < grid_.dim; ++j) sl.jac.push_back(m(i, j));
  }
}

void CoefficientSampler::accumulate(const Slice& sl, double w, const CubicStencil& s, bool derivatives,
                                    FieldEval& out) const {
  const int n = grid_.dim;
  for (int i = 0; i < n; ++i) out.value[i] += w * interpolate(sl.comps[i], s);
  if (!derivatives) return;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.jac[i][j] += w * interpolate(sl.jac[i * n + j], s);
}

FieldEval CoefficientSampler::eval(double t, const CubicStencil& s, bool derivatives) const {
  FieldEval out;
  if (is_static_) {
    accumulate(slices_[0], 1.0, s, derivatives, out);
  } else {
    std::size_t k = 0;
    double w = 0.0;
    if (t >= times_.back()) {
      k = times_.size() - 2;
      w = 1.0;
    } else if (t > times_.front()) {
      k = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin()) - 1;
      w = (t - times_[k]) / (times_[k + 1] - times_[k]);
    }
    if (w != 1.0) accumulate(slices_[k], 1.0 - w, s, derivatives, out);
    if (w != 0.0) accumulate(slices_[k + 1], w, s, derivatives, out);
  }
  if (derivatives) {
    const int n = grid_.dim;
    for (int i = 0; i < n; ++i) out.div += out.jac[i][i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.trace_sq += out.jac[i][j] * out.jac[j][i];
  }
  return out;
}

// ------------------------------------------------------------------ FlowEnsemble

Point FlowEnsemble::position(int step, std::size_t node) const {
  const auto n = static_cast<std::size_t>(grid.dim);
  const std::size_t base = (static_cast<std::size_t>(step) * nodes() + node) * n;
  return {positions[base], n == 2 ? positions[base + 1] : 0.0};
}

double FlowEnsemble::log_det_variational(int step, std::size_t node) const {
  const auto n = static_cast<std::size_t>(grid.dim);
  const std::size_t base = (static_cast<std::size_t>(step) * nodes() + node) * n * n;
  const double d = (n == 1) ? jacobians[base] : jacobians[base] * jacobians[base + 3] - jacobians[base + 1] * jacobians[base + 2];
  return std::log(d);
}

FlowEnsemble simulate_flow(const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas,
                           const SdeConfig& config, const BrownianPath& path, int start_step) {
  check_coefficients(b, sigmas);
  if (!(config.dt > 0.0) || config.mc_members < 1) fail(ErrorCode::BadTimeGrid, "SdeConfig needs dt > 0 and mc_members >= 1");
  if (std::abs(path.dt - config.dt) > 1e-12 * config.dt) fail(ErrorCode::BadTimeGrid, "path dt differs from config dt");
  if (path.k_count != static_cast<int>(sigmas.size()))
    fail(ErrorCode::BadIndex, "path has a different number of Wiener components than sigmas");
  if (start_step < 0 || start_step > path.steps) fail(ErrorCode::BadIndex, "start step outside the path");

  const Grid& g = b.grid();
  FlowEnsemble e;
  e.grid = g;
  e.start_step = start_step;
  e.steps = path.steps - start_step;
  e.dt = path.dt;
  e.path = path;
  const std::size_t nodes = g.size();
  const auto n = static_cast<std::size_t>(g.dim);
  e.positions.resize((static_cast<std::size_t>(e.steps) + 1) * nodes * n);
  for (std::size_t node = 0; node < nodes; ++node) {
    const Point x = g.node(node);
    for (std::size_t d = 0; d < n; ++d) e.positions[node * n + d] = x[d];
  }

  const CoefficientSampler bs(b);
  const std::vector<CoefficientSampler> ss = samplers_for(sigmas);
  const double blowup = 1e6 * g.length;
  parallel_for(nodes, [&](std::size_t node) {
    Point x = g.node(node);
    for (int step = 0; step < e.steps; ++step) {
      const int global = start_step + step;
      const double t = global * e.dt;
      const CubicStencil st = cubic_stencil(g, x);
      const FieldEval bv = bs.eval(t, st, false);
      Point next = x;
      for (std::size_t d = 0; d < n; ++d) next[d] += bv.value[d] * e.dt;
      for (std::size_t k = 0; k < ss.size(); ++k) {
        const FieldEval sv = ss[k].eval(t, st, false);
        const double dw = path.increment(global, static_cast<int>(k));
        for (std::size_t d = 0; d < n; ++d) next[d] += sv.value[d] * dw;
      }
      for (std::size_t d = 0; d < n; ++d)
        if (!std::isfinite(next[d]) || std::abs(next[d]) > blowup) trajectory_failure(global, node);
      x = next;
      const std::size_t base = ((static_cast<std::size_t>(step) + 1) * nodes + node) * n;
      for (std::size_t d = 0; d < n; ++d) e.positions[base + d] = x[d];
    }
  });
  return e;
}

void variational_jacobian(FlowEnsemble& e, const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas) {
  check_coefficients(b, sigmas);
  require_same_grid(e.grid, b.grid(), "variational_jacobian");
  const Grid& g = e.grid;
  const auto n = static_cast<std::size_t>(g.dim);
  const std::size_t nodes = e.nodes();
  const CoefficientSampler bs(b);
  const std::vector<CoefficientSampler> ss = samplers_for(sigmas);
  e.jacobians.assign((static_cast<std::size_t>(e.steps) + 1) * nodes * n * n, 0.0);
  parallel_for(nodes, [&](std::size_t node) {
    std::array<std::array<double, 2>, 2> J{{{1.0, 0.0}, {0.0, 1.0}}};
    auto store = [&](int step) {
      const std::size_t base = (static_cast<std::size_t>(step) * nodes + node) * n * n;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) e.jacobians[base + i * n + j] = J[i][j];
    };
    store(0);
    for (int step = 0; step < e.steps; ++step) {
      const int global = e.start_step + step;
      const double t = global * e.dt;
      const CubicStencil st = cubic_stencil(g, e.position(step, node));
      std::array<std::array<double, 2>, 2> A{};
      const FieldEval bv = bs.eval(t, st, true);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A[i][j] = bv.jac[i][j] * e.dt;
      for (std::size_t k = 0; k < ss.size(); ++k) {
        const FieldEval sv = ss[k].eval(t, st, true);
        const double dw = e.path.increment(global, static_cast<int>(k));
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) A[i][j] += sv.jac[i][j] * dw;
      }
      std::array<std::array<double, 2>, 2> next{};
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double s = J[i][j];
          for (std::size_t l = 0; l < n; ++l) s += A[i][l] * J[l][j];
          next[i][j] = s;
        }
      J = next;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (!std::isfinite(J[i][j])) trajectory_failure(global, node);
      store(step + 1);
    }
  });
}

void logdet_stochastic_exponential(FlowEnsemble& e, const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas) {
  check_coefficients(b, sigmas);
  require_same_grid(e.grid, b.grid(), "logdet_stochastic_exponential");
  const Grid& g = e.grid;
  const std::size_t nodes = e.nodes();
  const CoefficientSampler bs(b);
  const std::vector<CoefficientSampler> ss = samplers_for(sigmas);
  e.logdets.assign((static_cast<std::size_t>(e.steps) + 1) * nodes, 0.0);
  parallel_for(nodes, [&](std::size_t node) {
    double ell = 0.0;
    for (int step = 0; step < e.steps; ++step) {
      const int global = e.start_step + step;
      const double t = global * e.dt;
      const CubicStencil st = cubic_stencil(g, e.position(step, node));
      ell += bs.eval(t, st, true).div * e.dt;
      for (std::size_t k = 0; k < ss.size(); ++k) {
        const FieldEval sv = ss[k].eval(t, st, true);
        ell += sv.div * e.path.increment(global, static_cast<int>(k)) - 0.5 * sv.trace_sq * e.dt;
      }
      e.logdets[(static_cast<std::size_t>(step) + 1) * nodes + node] = ell;
    }
  });
}

FlowEnsemble simulate_member(const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas,
                             const SdeConfig& config, std::uint64_t member) {
  const BrownianPath path = sample_brownian(b.final_time(), config.dt, static_cast<int>(sigmas.size()),
                                            stream_id(config.master_seed, member));
  FlowEnsemble e = simulate_flow(b, sigmas, config, path);
  variational_jacobian(e, b, sigmas);
  logdet_stochastic_exponential(e, b, sigmas);
  return e;
}

// ------------------------------------------------------------------- inversion

Point InverseMap::point(std::size_t node) const {
  const auto n = static_cast<std::size_t>(grid.dim);
  return {points[node * n], n == 2 ? points[node * n + 1] : 0.0};
}

double min_simplex_jacobian(const FlowEnsemble& e, int step) {
  const Grid& g = e.grid;
  const int N = g.points;
  const double h = g.spacing();
  double worst = std::numeric_limits<double>::infinity();
  if (g.dim == 1) {
    for (int i = 0; i < N; ++i) {
      const double a = e.position(step, g.index(i))[0];
      const double b = e.position(step, g.index(i + 1))[0] + (i + 1 == N ? g.length : 0.0);
      worst = std::min(worst, (b - a) / h);
    }
    return worst;
  }
  auto pos = [&](int i, int j) {
    Point p = e.position(step, g.index(i, j));
    if (i >= N) p[0] += g.length;
    if (j >= N) p[1] += g.length;
    return p;
  };
  auto area = [](const Point& a, const Point& b, const Point& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  };
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const Point p00 = pos(i, j), p10 = pos(i + 1, j), p01 = pos(i, j + 1), p11 = pos(i + 1, j + 1);
      worst = std::min(worst, area(p00, p10, p11) / (h * h));
      worst = std::min(worst, area(p00, p11, p01) / (h * h));
    }
  return worst;
}

InverseMap invert_flow(const FlowEnsemble& e, int step) {
  if (step < 0 || step > e.steps) fail(ErrorCode::BadIndex, "inversion step outside the ensemble");
  const double simplex = min_simplex_jacobian(e, step);
  if (!(simplex > 0.0)) {
    std::ostringstream os;
    os << "sampled flow map is not injective at step " << step << " (min simplex Jacobian " << simplex << ")";
    fail(ErrorCode::NotInjective, os.str());
  }
  const Grid& g = e.grid;
  const auto n = static_cast<std::size_t>(g.dim);
  const std::size_t nodes = e.nodes();

  std::vector<GridScalar> disp(n, GridScalar(g));
  for (std::size_t node = 0; node < nodes; ++node) {
    const Point x = g.node(node);
    const Point X = e.position(step, node);
    for (std::size_t d = 0; d < n; ++d) disp[d][node] = X[d] - x[d];
  }
  const bool have_jac = !e.jacobians.empty();
  GridScalar det_forward(g, 1.0);
  if (have_jac)
    for (std::size_t node = 0; node < nodes; ++node) det_forward[node] = std::exp(e.log_det_variational(step, node));

  // Lipschitz bound of the displacement, for the fixed-point fallback.
  double lip = 0.0;
  for (std::size_t node = 0; node < nodes; ++node) {
    const CubicStencil st = cubic_stencil(g, g.node(node));
    double s = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      const Point gr = interpolate_gradient(disp[d], st);
      s += gr[0] * gr[0] + gr[1] * gr[1];
    }
    lip = std::max(lip, std::sqrt(s));
  }

  InverseMap inv;
  inv.grid = g;
  inv.points.assign(nodes * n, 0.0);
  inv.det = GridScalar(g);
  std::vector<int> iterations(nodes, 0);
  std::vector<char> fallback(nodes, 0);
  const double tol = 1e-12 * g.length;

  // Forward images bucketed by grid cell; each inversion starts from the node whose image is nearest.
  const int N = g.points;
  const double h = g.spacing();
  std::vector<std::vector<std::size_t>> buckets(nodes);
  auto cell_of = [&](double v) {
    const double w = v - g.length * std::floor(v / g.length);
    return std::min(N - 1, static_cast<int>(w / h));
  };
  for (std::size_t node = 0; node < nodes; ++node) {
    const Point X = e.position(step, node);
    const std::size_t b = g.dim == 1 ? g.index(cell_of(X[0])) : g.index(cell_of(X[0]), cell_of(X[1]));
    buckets[b].push_back(node);
  }
  auto nearest_seed = [&](const Point& x) {
    const int ci = cell_of(x[0]);
    const int cj = g.dim == 1 ? 0 : cell_of(x[1]);
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    int found_ring = -1;
    for (int ring = 0; ring <= N / 2; ++ring) {
      if (found_ring >= 0 && ring > found_ring + 1) break;
      for (int di = -ring; di <= ring; ++di)
        for (int dj = (g.dim == 1 ? 0 : -ring); dj <= (g.dim == 1 ? 0 : ring); ++dj) {
          if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
          const std::size_t b = g.dim == 1 ? g.index(ci + di) : g.index(ci + di, cj + dj);
          for (std::size_t cand : buckets[b]) {
            const Point X = e.position(step, cand);
            double d2 = 0.0;
            for (std::size_t d = 0; d < n; ++d) {
              const double w = wrap_difference(X[d], x[d], g.length);
              d2 += w * w;
            }
            if (d2 < best_d2 || (d2 == best_d2 && cand < best)) {
              best_d2 = d2;
              best = cand;
            }
          }
        }
      if (best_d2 < std::numeric_limits<double>::infinity() && found_ring < 0) found_ring = ring;
    }
    return g.node(best);
  };

  parallel_for(nodes, [&](std::size_t node) {
    const Point x = g.node(node);
    auto forward = [&](const Point& y, std::array<std::array<double, 2>, 2>* jac) {
      const CubicStencil st = cubic_stencil(g, y);
      Point r{0.0, 0.0};
      for (std::size_t d = 0; d < n; ++d) {
        r[d] = wrap_difference(y[d] + interpolate(disp[d], st), x[d], g.length);
        if (jac) {
          const Point gr = interpolate_gradient(disp[d], st);
          for (std::size_t j = 0; j < n; ++j) (*jac)[d][j] = (d == j ? 1.0 : 0.0) + gr[j];
        }
      }
      return r;
    };
    auto norm = [&](const Point& r) { return std::sqrt(r[0] * r[0] + r[1] * r[1]); };

    Point y = nearest_seed(x);
    bool ok = false;
    int it = 0;
    for (; it < kMaxNewton; ++it) {
      std::array<std::array<double, 2>, 2> J{};
      const Point r = forward(y, &J);
      const double rn = norm(r);
      if (rn <= tol) {
        ok = true;
        break;
      }
      const double det = det2(J, g.dim);
      if (!(std::abs(det) > 1e-14)) break;
      Point step_dir{0.0, 0.0};
      if (n == 1) {
        step_dir[0] = r[0] / J[0][0];
      } else {
        step_dir[0] = (J[1][1] * r[0] - J[0][1] * r[1]) / det;
        step_dir[1] = (-J[1][0] * r[0] + J[0][0] * r[1]) / det;
      }
      // Backtrack until the residual decreases.
      double scale = 1.0;
      Point trial = y;
      for (int halving = 0; halving < 30; ++halving, scale *= 0.5) {
        for (std::size_t d = 0; d < n; ++d) trial[d] = y[d] - scale * step_dir[d];
        if (norm(forward(trial, nullptr)) < rn) break;
      }
      y = trial;
    }
    if (!ok && lip < 1.0) {
      fallback[node] = 1;
      y = x;
      const int budget = 200 + static_cast<int>(std::log(tol) / std::log(std::max(lip, 1e-3)));
      for (it = 0; it < budget; ++it) {
        const Point r = forward(y, nullptr);
        if (norm(r) <= tol) {
          ok = true;
          break;
        }
        for (std::size_t d = 0; d < n; ++d) y[d] -= r[d];
      }
    }
    if (!ok) {
      std::ostringstream os;
      os << "flow inversion stagnated at node " << node << ", step " << step;
      fail(ErrorCode::NewtonStagnation, os.str());
    }
    iterations[node] = it;
    for (std::size_t d = 0; d < n; ++d) inv.points[node * n + d] = y[d];
    const CubicStencil st = cubic_stencil(g, y);
    double det_phi = 0.0;
    if (have_jac) {
      det_phi = interpolate(det_forward, st);
    } else {
      std::array<std::array<double, 2>, 2> J{};
      forward(y, &J);
      det_phi = det2(J, g.dim);
    }
    inv.det[node] = 1.0 / det_phi;
  });
  for (std::size_t node = 0; node < nodes; ++node) {
    inv.max_iterations = std::max(inv.max_iterations, iterations[node]);
    inv.used_fallback = inv.used_fallback || fallback[node] != 0;
  }
  return inv;
}

GridScalar pushforward_solution(const GridScalar& f0, const InverseMap& inverse) {
  require_same_grid(f0.grid(), inverse.grid, "pushforward_solution");
  GridScalar out(f0.grid());
  for (std::size_t node = 0; node < out.size(); ++node)
    out[node] = interpolate(f0, inverse.point(node)) * inverse.det[node];
  return out;
}

GridScalar pushforward_solution(const GridScalar& f0, const FlowEnsemble& ensemble, int step) {
  return pushforward_solution(f0, invert_flow(ensemble, step));
}

MeanEstimate ensemble_moment(std::span<const double> values, double power) {
  if (values.empty()) fail(ErrorCode::EmptyEnsemble, "ensemble_moment needs at least one ensemble");
  if (values.size() < 2) fail(ErrorCode::TooFewSamples, "ensemble_moment needs at least two independent ensembles");
  std::vector<double> powered(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) powered[k] = power == 1.0 ? values[k] : std::pow(values[k], power);
  return mean_and_stderr(powered);
}

MeanEstimate ensemble_moment(std::span<const FlowEnsemble> ensembles,
                             const std::function<double(const FlowEnsemble&)>& functional, double power) {
  if (ensembles.empty()) fail(ErrorCode::EmptyEnsemble, "ensemble_moment needs at least one ensemble");
  std::vector<double> values(ensembles.size());
  parallel_for(ensembles.size(), [&](std::size_t k) { values[k] = functional(ensembles[k]); });
  return ensemble_moment(values, power);
}

double moment_bound_constant(const TimeGridVector& b, const std::vector<TimeGridVector>& sigmas, double p, int steps) {
  if (!(p >= 1.0)) fail(ErrorCode::BadExponent, "moment bound needs p >= 1");
  if (steps < 1) fail(ErrorCode::BadTimeGrid, "moment bound needs steps >= 1");
  const double T = b.final_time();
  const double dt = T / steps;
  double c1_exponent = 0.0, martingale = 0.0;
  for (int j = 0; j < steps; ++j) {
    const double t = j * dt;
    const double div_b = divergence(b.sample(t)).max_abs();
    GridScalar trace_sum(b.grid());
    double div_sigma_sq = 0.0;
    for (const auto& s : sigmas) {
      const GridMatrix m = jacobian(s.sample(t));
      trace_sum += m.trace_of_square();
      const double d = m.trace().max_abs();
      div_sigma_sq += d * d;
    }
    c1_exponent += ((p - 1.0) * div_b + 0.5 * (p - 1.0) * trace_sum.max_abs() + 0.5 * (p - 1.0) * (p - 1.0) * div_sigma_sq) * dt;
    martingale += (p - 1.0) * (p - 1.0) * div_sigma_sq * dt;
  }
  return 4.0 * std::exp(2.0 * c1_exponent + martingale);
}

}  // namespace renormlab
