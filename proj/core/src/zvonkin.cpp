#include "renormlab/zvonkin.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "renormlab/error.hpp"
#include "renormlab/interpolate.hpp"
#include "renormlab/mollifier.hpp"
#include "renormlab/parallel.hpp"
#include "renormlab/stats.hpp"

namespace renormlab {

namespace {

/// u and grad u at one instant.
struct Frame {
  GridVector u;
  GridMatrix grad;
};

GridMatrix blend(const GridMatrix& a, const GridMatrix& b, double w) {
  GridMatrix out = a;
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) out(i, j) = (1.0 - w) * a(i, j) + w * b(i, j);
  return out;
}

Frame frame_at(const Diffeo& d, double t) {
  const auto [k, w] = d.u.locate(t);
  if (w == 0.0) return {d.u.slice(k), d.grad[k]};
  if (w == 1.0) return {d.u.slice(k + 1), d.grad[k + 1]};
  return {(1.0 - w) * d.u.slice(k) + w * d.u.slice(k + 1), blend(d.grad[k], d.grad[k + 1], w)};
}

int iteration_budget(double lip, double tol, double length) {
  const double rate = std::max(lip, 1e-3);
  return static_cast<int>(std::ceil(std::log(tol / std::max(length, 1.0)) / std::log(rate))) + 100;
}

DiffeoInversion invert_point(const Frame& f, double lip, const Point& x, double tol, bool record) {
  const Grid& g = f.u.grid();
  const int n = g.dim;
  DiffeoInversion out;
  Point y = x;
  double prev_step = 0.0;
  const int budget = iteration_budget(lip, tol, g.length);
  for (int it = 1; it <= budget; ++it) {
    const CubicStencil s = cubic_stencil(g, y);
    Point next = x;
    for (int d = 0; d < n; ++d) next[d] -= interpolate(f.u[d], s);
    double step = 0.0;
    for (int d = 0; d < n; ++d) step += (next[d] - y[d]) * (next[d] - y[d]);
    step = std::sqrt(step);
    if (record && it > 1 && prev_step > 0.0) out.error_ratios.push_back(step / prev_step);
    prev_step = step;
    y = next;
    const CubicStencil s2 = cubic_stencil(g, y);
    double res = 0.0;
    for (int d = 0; d < n; ++d) {
      const double r = y[d] + interpolate(f.u[d], s2) - x[d];
      res += r * r;
    }
    out.residual = std::sqrt(res);
    out.iterations = it;
    if (out.residual <= tol) {
      out.y = y;
      return out;
    }
  }
  std::ostringstream os;
  os << "diffeomorphism inversion stagnated (residual " << out.residual << " after " << out.iterations
     << " iterations, lip " << lip << ")";
  fail(ErrorCode::InversionStagnation, os.str());
}

std::vector<double> invert_frame(const Frame& f, double lip, double tol) {
  const Grid& g = f.u.grid();
  const auto n = static_cast<std::size_t>(g.dim);
  std::vector<double> pts(g.size() * n);
  parallel_for(g.size(), [&](std::size_t node) {
    const DiffeoInversion inv = invert_point(f, lip, g.node(node), tol, false);
    for (std::size_t d = 0; d < n; ++d) pts[node * n + d] = inv.y[d];
  });
  return pts;
}

Point point_of(const std::vector<double>& pts, std::size_t node, int dim) {
  const auto n = static_cast<std::size_t>(dim);
  return {pts[node * n], dim == 2 ? pts[node * n + 1] : 0.0};
}

}  // namespace

Diffeo build_diffeo(const TimeGridVector& u) {
  Diffeo d;
  d.u = u;
  const int n = u.grid().dim;
  d.det_min = std::numeric_limits<double>::infinity();
  d.det_max = -std::numeric_limits<double>::infinity();
  for (const auto& slice : u.slices()) {
    d.grad.push_back(jacobian(slice));
    d.lip = std::max(d.lip, d.grad.back().operator_norm().max_abs());
    const GridScalar det = d.grad.back().det_identity_plus();
    for (std::size_t k = 0; k < det.size(); ++k) {
      d.det_min = std::min(d.det_min, det[k]);
      d.det_max = std::max(d.det_max, det[k]);
    }
  }
  if (!(d.lip < 1.0)) {
    std::ostringstream os;
    os << "||grad u||_inf = " << d.lip << " must be below 1";
    fail(ErrorCode::LipTooLarge, os.str());
  }
  d.det_lo = std::pow(1.0 - d.lip, n);
  d.det_hi = std::pow(1.0 + d.lip, n);
  return d;
}

DiffeoInversion invert_diffeo(const Diffeo& diffeo, double t, const Point& x, double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::BadExponent, "tolerance must be positive");
  return invert_point(frame_at(diffeo, t), diffeo.lip, x, tol, true);
}

std::vector<double> invert_nodes(const Diffeo& diffeo, double t, double tol) {
  return invert_frame(frame_at(diffeo, t), diffeo.lip, tol);
}

TransformedCoeffs transform_coeffs(const Diffeo& diffeo, double lambda) {
  const Grid& g = diffeo.u.grid();
  const int n = g.dim;
  const std::size_t count = diffeo.u.count();
  std::vector<GridVector> bh(count, GridVector(g));
  std::vector<std::vector<GridVector>> sh(static_cast<std::size_t>(n), std::vector<GridVector>(count, GridVector(g)));
  for (std::size_t j = 0; j < count; ++j) {
    const Frame f{diffeo.u.slice(j), diffeo.grad[j]};
    const std::vector<double> pts = invert_frame(f, diffeo.lip, 1e-13);
    parallel_for(g.size(), [&](std::size_t node) {
      const CubicStencil s = cubic_stencil(g, point_of(pts, node, n));
      for (int i = 0; i < n; ++i) {
        bh[j][i][node] = lambda * interpolate(f.u[i], s);
        for (int k = 0; k < n; ++k) sh[k][j][i][node] = (i == k ? 1.0 : 0.0) + interpolate(f.grad(i, k), s);
      }
    });
  }
  TransformedCoeffs out;
  out.b_hat = TimeGridVector(diffeo.u.times(), std::move(bh));
  for (int k = 0; k < n; ++k) out.sigma_hat.emplace_back(diffeo.u.times(), std::move(sh[k]));
  return out;
}

GridScalar jacobian_det_at_inverse(const Diffeo& diffeo, double t) {
  const Frame f = frame_at(diffeo, t);
  const Grid& g = f.u.grid();
  const std::vector<double> pts = invert_frame(f, diffeo.lip, 1e-13);
  const GridScalar det = f.grad.det_identity_plus();
  GridScalar out(g);
  for (std::size_t node = 0; node < g.size(); ++node) out[node] = interpolate(det, point_of(pts, node, g.dim));
  return out;
}

GridScalar pushforward_under_diffeo(const GridScalar& f, const Diffeo& diffeo, double t) {
  require_same_grid(f.grid(), diffeo.u.grid(), "pushforward_under_diffeo");
  const Frame fr = frame_at(diffeo, t);
  const Grid& g = f.grid();
  const std::vector<double> pts = invert_frame(fr, diffeo.lip, 1e-13);
  const GridScalar det = fr.grad.det_identity_plus();
  GridScalar out(g);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const CubicStencil s = cubic_stencil(g, point_of(pts, node, g.dim));
    out[node] = interpolate(f, s) / interpolate(det, s);
  }
  return out;
}

GridScalar compose_inverse(const GridScalar& gfield, const Diffeo& diffeo, double t) {
  require_same_grid(gfield.grid(), diffeo.u.grid(), "compose_inverse");
  const Grid& g = gfield.grid();
  const std::vector<double> pts = invert_nodes(diffeo, t, 1e-13);
  GridScalar out(g);
  for (std::size_t node = 0; node < g.size(); ++node) out[node] = interpolate(gfield, point_of(pts, node, g.dim));
  return out;
}

WeakFormLedger transformed_residual(std::span<const GridScalar> fpath, const Diffeo& diffeo,
                                    const TransformedCoeffs& coeffs, const TestFunction& phi,
                                    const BrownianPath& path) {
  if (fpath.size() != static_cast<std::size_t>(path.steps) + 1)
    fail(ErrorCode::BadTimeGrid, "fpath must hold one slice per path step boundary");
  std::vector<GridScalar> pushed(fpath.size());
  for (std::size_t n = 0; n < fpath.size(); ++n)
    pushed[n] = pushforward_under_diffeo(fpath[n], diffeo, static_cast<double>(n) * path.dt);
  return residual_original(pushed, coeffs.b_hat, coeffs.sigma_hat, phi, path);
}

RelaxationMetrics relaxation_metrics(const TransformedCoeffs& coeffs, const TimeGridVector& b, double q, double p,
                                     double r) {
  if (!(r < p)) fail(ErrorCode::BadExponent, "relaxation metrics need r < p");
  const auto& times = coeffs.b_hat.times();
  const std::size_t count = times.size();
  const Grid& g = coeffs.b_hat.grid();
  const int n = g.dim;
  std::vector<double> bh(count), div(count);
  std::vector<std::vector<double>> sig(static_cast<std::size_t>(n), std::vector<double>(count));
  std::vector<std::vector<double>> grad(static_cast<std::size_t>(n), std::vector<double>(count));
  parallel_for(count, [&](std::size_t j) {
    const GridVector bj = b.sample(times[j]);
    const GridVector& bhat = coeffs.b_hat.slice(j);
    bh[j] = lp_norm((bhat - bj).magnitude(), p);
    div[j] = lp_norm(divergence(bhat) - divergence(bj), 1.0);
    for (int k = 0; k < n; ++k) {
      const GridVector& s = coeffs.sigma_hat[k].slice(j);
      Point e{0.0, 0.0};
      e[k] = 1.0;
      sig[k][j] = lp_norm((s - GridVector::constant(g, e)).magnitude(), p);
      grad[k][j] = lp_norm(jacobian(s).frobenius(), r);
    }
  });
  const double dt = times.back() / (static_cast<double>(count) - 1.0);
  RelaxationMetrics m;
  m.bhat_err = time_norm(bh, dt, q);
  m.div_err = time_norm(div, dt, 1.0);
  for (int k = 0; k < n; ++k) {
    m.sigma_err += time_norm(sig[k], dt, q);
    m.grad_sigma_err += time_norm(grad[k], dt, q);
  }
  return m;
}

void write_relaxation_csv(std::ostream& os, const std::vector<double>& lambdas,
                          const std::vector<RelaxationMetrics>& metrics) {
  os << "# renormlab v1\n";
  os << "lambda,bhat_err,sigma_err,grad_sigma_err,div_err\n";
  os.precision(17);
  for (std::size_t k = 0; k < lambdas.size(); ++k)
    os << lambdas[k] << ',' << metrics[k].bhat_err << ',' << metrics[k].sigma_err << ',' << metrics[k].grad_sigma_err
       << ',' << metrics[k].div_err << '\n';
}

}  // namespace renormlab
