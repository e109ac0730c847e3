#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "renormlab/error.hpp"
#include "renormlab/parabolic.hpp"
#include "renormlab/presets.hpp"

using namespace renormlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double gaussian(double x, double var) { return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var); }

}  // namespace

TEST_CASE("heat semigroup fixes constants and is the identity at t = 0") {
  const Grid g = build_grid(2, kTwoPi, 32);
  CHECK((heat_apply(GridScalar(g, 1.7), 0.8) - GridScalar(g, 1.7)).max_abs() <= 1e-13);
  const GridScalar f = GridScalar::sample(g, [](const Point& x) { return std::sin(x[0]) * std::exp(std::cos(x[1])); });
  CHECK((heat_apply(f, 0.0) - f).max_abs() == 0.0);
}

TEST_CASE("heat semigroup adds t to the variance of a Gaussian") {
  const Grid g = build_grid(1, kTwoPi, 256);
  const double c = g.center(), v = 0.1, t = 0.15;
  const GridScalar g0 = GridScalar::sample(g, [&](const Point& x) { return gaussian(x[0] - c, v); });
  const GridScalar expected = GridScalar::sample(g, [&](const Point& x) { return gaussian(x[0] - c, v + t); });
  CHECK((heat_apply(g0, t) - expected).max_abs() <= 1e-6);
}

TEST_CASE("zero drift gives the zero solution in one iteration") {
  const Grid g = build_grid(1, kTwoPi, 32);
  const ParabolicSolution sol = mild_solve(TimeGridVector::constant(GridVector(g), 0.5), 4.0);
  CHECK(sol.iterations == 1);
  for (const auto& s : sol.u.slices()) CHECK(s.max_abs() == 0.0);
}

TEST_CASE("constant drift matches the scalar ODE") {
  const Grid g = build_grid(2, kTwoPi, 16);
  const double T = 0.5;
  const Point c{0.8, -0.3};
  for (double lambda : {4.0, 16.0, 64.0}) {
    const ParabolicSolution sol = mild_solve(TimeGridVector::constant(GridVector::constant(g, c), T), lambda);
    for (std::size_t k = 0; k < sol.u.count(); ++k) {
      const double factor = (1.0 - std::exp(-lambda * (T - sol.u.times()[k]))) / lambda;
      for (int d = 0; d < 2; ++d) REQUIRE(std::abs(sol.u.slice(k)[d][0] - c[d] * factor) <= 1e-12);
      REQUIRE(sol.u.slice(k)[0].max_abs() - sol.u.slice(k)[0][0] <= 1e-14);
    }
  }
}

TEST_CASE("mild solution is a fixed point and Picard defects contract") {
  const Grid g = build_grid(1, kTwoPi, 64);
  const TimeGridVector b = drift_preset("trig", g, 0.5);
  MildSolveOptions opts;
  opts.quad_steps = 256;
  const ParabolicSolution sol = mild_solve(b, 16.0, opts);
  CHECK(sol.residual <= opts.tol);
  CHECK(mild_map_defect(sol, b) <= 10.0 * opts.tol);
  CHECK_FALSE(sol.contraction_warning);
  for (std::size_t k = 2; k < sol.defects.size(); ++k) CHECK(sol.defects[k] < sol.defects[k - 1]);
}

TEST_CASE("PDE residual decreases at first order in the time step") {
  const Grid g = build_grid(1, kTwoPi, 64);
  const TimeGridVector b = drift_preset("trig", g, 0.5);
  std::vector<double> res;
  for (int steps : {128, 256, 512}) {
    MildSolveOptions opts;
    opts.quad_steps = steps;
    res.push_back(pde_residual(mild_solve(b, 16.0, opts), b));
  }
  CHECK(std::log2(res[0] / res[1]) >= 0.9);
  CHECK(std::log2(res[1] / res[2]) >= 0.9);
}

TEST_CASE("decay exponent bookkeeping") {
  const Grid g = build_grid(1, kTwoPi, 32);
  const TimeGridVector b = TimeGridVector::constant(GridVector::constant(g, {1.0, 0.0}), 0.5);
  const DecayStudy a0 = decay_study(b, {8.0, 32.0, 128.0}, 0, 8.0, 8.0, 4.0);
  CHECK(a0.theory_delta == doctest::Approx(1.0));
  CHECK(a0.matches_rate());
  const DecayStudy a1 = decay_study(b, {8.0, 32.0, 128.0}, 1, 8.0, 8.0, 4.0);
  CHECK(a1.theory_delta == doctest::Approx(0.5));
  std::ostringstream os;
  write_csv(os, a0);
  CHECK(os.str().rfind("# renormlab v1\n", 0) == 0);
  CHECK_THROWS_AS(decay_study(b, {8.0, 32.0, 128.0}, 0, 8.0, 2.0, 4.0), Error);
  CHECK_THROWS_AS(decay_study(b, {8.0, 32.0}, 0, 8.0, 8.0, 4.0), Error);
}

TEST_CASE("decay slope for an L^q-in-time amplitude") {
  // b = c(t) sin x e_1 with c(t) = 1 + cos(2 pi t / T) / 2.
  const Grid g = build_grid(1, kTwoPi, 64);
  const TimeGridVector b = drift_preset("pulsed", g, 0.5);
  const DecayStudy a0 = decay_study(b, {8.0, 32.0, 128.0}, 0, 8.0, 8.0, 4.0);
  CHECK(std::abs(a0.fitted_slope + a0.theory_delta) <= 0.15);
}

TEST_CASE("relaxation residuals vanish for zero drift and decrease in lambda") {
  const Grid g = build_grid(1, kTwoPi, 32);
  const TimeGridVector zero = TimeGridVector::constant(GridVector(g), 0.5);
  const RelaxationResiduals r0 = relaxation_residuals(mild_solve(zero, 4.0), zero, 8.0);
  CHECK(r0.drift == 0.0);
  CHECK(r0.divergence == 0.0);
  const TimeGridVector b = drift_preset("trig", g, 0.5);
  double prev = INFINITY;
  for (double lambda : {4.0, 16.0, 64.0}) {
    const double d = relaxation_residuals(mild_solve(b, lambda), b, 8.0).drift;
    CHECK(d < prev);
    prev = d;
  }
}
