#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "renormlab/commutator.hpp"
#include "renormlab/error.hpp"
#include "renormlab/spectral.hpp"

using namespace renormlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

GridVector sin_field(const Grid& g) {
  return GridVector::sample(g, [](const Point& x) -> Point { return {std::sin(x[0]), 0.0}; });
}

GridScalar cos_field(const Grid& g) {
  return GridScalar::sample(g, [](const Point& x) { return std::cos(x[0]); });
}

// T(x_i) = sum_j (sigma(x_i) - sigma(x_j)) . grad eta(x_i - x_j) f(x_j) h^n, by direct double sum.
GridScalar op_T_quadrature(const GridVector& sigma, const GridScalar& f, double eps) {
  const Grid& g = f.grid();
  const MollifierKernel k = mollifier(g, eps);
  const GridVector grad_eta = gradient(k.values);
  const int n = g.points;
  GridScalar out(g);
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < (g.dim == 2 ? n : 1); ++i1) {
      const std::size_t xi = g.index(i0, i1);
      double s = 0.0;
      for (int j0 = 0; j0 < n; ++j0)
        for (int j1 = 0; j1 < (g.dim == 2 ? n : 1); ++j1) {
          const std::size_t yj = g.index(j0, j1);
          const std::size_t diff = g.index(i0 - j0, i1 - j1);
          for (int d = 0; d < g.dim; ++d) s += (sigma[d][xi] - sigma[d][yj]) * grad_eta[d][diff] * f[yj];
        }
      out[xi] = s * g.cell_volume();
    }
  return out;
}

}  // namespace

TEST_CASE("T vanishes for constant sigma") {
  for (int dim : {1, 2}) {
    const Grid g = build_grid(dim, kTwoPi, 32);
    const GridScalar f = GridScalar::sample(g, [](const Point& x) { return std::exp(std::sin(x[0]) + std::cos(x[1])); });
    CHECK(op_T(GridVector::constant(g, {0.7, -1.3}), f, g.length / 8.0).max_abs() <= 1e-10);
  }
}

TEST_CASE("T of the constant field is minus the mollified divergence") {
  const Grid g = build_grid(1, kTwoPi, 64);
  const GridVector sigma = sin_field(g);
  const double eps = g.length / 16.0;
  const GridScalar expected = -convolve(divergence(sigma), mollifier(g, eps));
  CHECK((op_T(sigma, GridScalar(g, 1.0), eps) - expected).max_abs() <= 1e-12);
  const GridScalar drift = op_T_drift(sigma, GridScalar(g, 1.0), eps);
  CHECK((drift - expected).max_abs() <= 1e-12);
}

TEST_CASE("T agrees with direct kernel quadrature") {
  for (int dim : {1, 2}) {
    const Grid g = build_grid(dim, kTwoPi, dim == 1 ? 64 : 16);
    const GridVector sigma = GridVector::sample(g, [](const Point& x) -> Point {
      return {std::sin(x[0]) + 0.3 * std::cos(x[1]), 0.5 * std::cos(x[0] + x[1])};
    });
    const GridScalar f = GridScalar::sample(g, [](const Point& x) { return std::cos(x[0]) + 0.4 * std::sin(2.0 * x[1]); });
    const double eps = g.length / 8.0;
    const GridScalar fast = op_T(sigma, f, eps);
    const GridScalar direct = op_T_quadrature(sigma, f, eps);
    CHECK((fast - direct).max_abs() <= 1e-7 * direct.max_abs());
  }
}

TEST_CASE("S cancels for constant or zero sigma") {
  const Grid g = build_grid(2, kTwoPi, 32);
  const GridScalar f = GridScalar::sample(g, [](const Point& x) { return std::cos(x[0]) * std::sin(x[1]); });
  CHECK(op_S(GridVector::constant(g, {1.1, 0.4}), f, g.length / 8.0).max_abs() <= 1e-9);
  CHECK(op_S(GridVector(g), f, g.length / 8.0).max_abs() == 0.0);
}

TEST_CASE("smooth-case limits") {
  const Grid g1 = build_grid(1, kTwoPi, 64);
  const CommutatorLimits l1 = commutator_limits(sin_field(g1), GridScalar(g1, 1.0));
  const GridScalar cosx = cos_field(g1);
  CHECK((l1.t_limit - kTLimitSign * cosx).max_abs() <= 1e-10);
  CHECK((l1.s_limit - cosx * cosx).max_abs() <= 1e-10);

  // sigma = (sin y, sin x): divergence free, d_i sigma_j d_j sigma_i = 2 cos x cos y.
  const Grid g2 = build_grid(2, kTwoPi, 32);
  const GridVector swirl = GridVector::sample(g2, [](const Point& x) -> Point { return {std::sin(x[1]), std::sin(x[0])}; });
  const CommutatorLimits l2 = commutator_limits(swirl, GridScalar(g2, 1.0));
  const GridScalar cc = GridScalar::sample(g2, [](const Point& x) { return std::cos(x[0]) * std::cos(x[1]); });
  CHECK(l2.t_limit.max_abs() <= 1e-10);
  CHECK((l2.s_limit - cc).max_abs() <= 1e-10);

  const CommutatorLimits l0 = commutator_limits(GridVector::constant(g2, {1.0, 2.0}), cc);
  CHECK(l0.t_limit.max_abs() <= 1e-12);
  CHECK(l0.s_limit.max_abs() <= 1e-12);
}

TEST_CASE("T and S converge to their limits") {
  const Grid g = build_grid(1, kTwoPi, 64);
  const std::vector<double> eps = {g.length / 8.0, g.length / 16.0, g.length / 32.0};
  const CommutatorStudy t = convergence_study(CommutatorOp::T, sin_field(g), cos_field(g), eps, {2.0, 4.0, 4.0 / 3.0});
  const CommutatorStudy s = convergence_study(CommutatorOp::S, sin_field(g), cos_field(g), eps, {2.0, 8.0, 4.0 / 3.0});
  for (const auto* st : {&t, &s}) {
    CHECK_FALSE(st->degenerate_zero);
    CHECK(st->errors[1] < st->errors[0]);
    CHECK(st->errors[2] < st->errors[1]);
    CHECK(st->fitted_rate >= 0.9);
  }
  std::ostringstream os;
  write_csv(os, t);
  CHECK(os.str().rfind("# renormlab v1\n", 0) == 0);
}

TEST_CASE("convergence study flags constant sigma and validates inputs") {
  const Grid g = build_grid(1, kTwoPi, 64);
  const std::vector<double> eps = {g.length / 8.0, g.length / 16.0, g.length / 32.0};
  const CommutatorStudy st =
      convergence_study(CommutatorOp::T, GridVector::constant(g, {2.0, 0.0}), cos_field(g), eps, {2.0, 4.0, 4.0 / 3.0});
  CHECK(st.degenerate_zero);
  for (double e : st.errors) CHECK(e <= 1e-9);
  CHECK_THROWS_AS(convergence_study(CommutatorOp::T, sin_field(g), cos_field(g), {0.5, 0.4}, {}), Error);
  CHECK_THROWS_AS(convergence_study(CommutatorOp::T, sin_field(g), cos_field(g), eps, {2.0, 4.0, 2.0}), Error);
  CHECK_THROWS_AS(convergence_study(CommutatorOp::T, sin_field(g), cos_field(g), {0.4, 0.5, 0.3}, {}), Error);
}

TEST_CASE("remainder identities select one sign") {
  for (int dim : {1, 2}) {
    const Grid g = build_grid(dim, kTwoPi, 64);
    const GridVector sigma = GridVector::sample(g, [](const Point& x) -> Point {
      return {std::sin(x[0]) + 0.2 * std::cos(x[1]), 0.3 * std::sin(x[0] + x[1])};
    });
    const GridScalar f = GridScalar::sample(g, [](const Point& x) { return std::cos(x[0]) + 0.5 * std::sin(x[1]); });
    const RemainderIdentities id = remainder_identities(sigma, f, make_renormalizer(RenormalizerTag::Tanh), g.length / 16.0);
    INFO("dim " << dim << " r1 " << id.r1_residual_plus << " r2 " << id.r2_residual_minus);
    CHECK(id.r1_sign == 1);
    CHECK(id.r2_sign == -1);
    CHECK(id.r1_residual_plus <= 1e-6);
    CHECK(id.r1_residual_minus > 1e-6);
    CHECK(id.r2_residual_minus <= 1e-6);
    CHECK(id.r2_residual_plus > 1e-6);
  }
}
