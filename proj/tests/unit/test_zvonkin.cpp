#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "renormlab/error.hpp"
#include "renormlab/interpolate.hpp"
#include "renormlab/mollifier.hpp"
#include "renormlab/parabolic.hpp"
#include "renormlab/presets.hpp"
#include "renormlab/zvonkin.hpp"

using namespace renormlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kT = 0.5;

TimeGridVector shear(const Grid& g, double a) {
  return TimeGridVector::constant(GridVector::sample(g, [a](const Point& x) -> Point { return {a * std::sin(x[0]), 0.0}; }), kT);
}

}  // namespace

TEST_CASE("identity diffeomorphism") {
  const Grid g = build_grid(2, kTwoPi, 16);
  const Diffeo d = build_diffeo(TimeGridVector::constant(GridVector(g), kT));
  CHECK(d.lip == 0.0);
  CHECK(d.det_lo == 1.0);
  CHECK(d.det_hi == 1.0);
  const DiffeoInversion inv = invert_diffeo(d, 0.2, {1.0, 2.0});
  CHECK(inv.iterations == 1);
  CHECK(inv.y == Point{1.0, 2.0});
  const TransformedCoeffs tc = transform_coeffs(d, 8.0);
  for (const auto& s : tc.b_hat.slices()) CHECK(s.max_abs() == 0.0);
  for (int k = 0; k < 2; ++k)
    for (const auto& s : tc.sigma_hat[std::size_t(k)].slices()) {
      CHECK((s[k] - GridScalar(g, 1.0)).max_abs() == 0.0);
      CHECK(s[1 - k].max_abs() == 0.0);
    }
  const GridScalar f = GridScalar::sample(g, [](const Point& x) { return std::cos(x[0] - x[1]); });
  CHECK((pushforward_under_diffeo(f, d, 0.3) - f).max_abs() <= 1e-14);
}

TEST_CASE("determinant bracket") {
  const Grid g = build_grid(2, kTwoPi, 32);
  const Diffeo d = build_diffeo(shear(g, 0.4));
  CHECK(d.lip == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(d.det_lo == doctest::Approx(0.36));
  CHECK(d.det_hi == doctest::Approx(1.96));
  CHECK(d.brackets_determinant());
  try {
    build_diffeo(shear(g, 1.2));
    FAIL("expected LipTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LipTooLarge);
  }
}

TEST_CASE("inversion is a true inverse") {
  const Grid g = build_grid(2, kTwoPi, 32);
  const TimeGridVector u = TimeGridVector::constant(GridVector::sample(g, [](const Point& x) -> Point {
    return {0.3 * std::sin(x[1]) + 0.1 * std::cos(x[0]), 0.25 * std::sin(x[0] + x[1])};
  }), kT);
  const Diffeo d = build_diffeo(u);
  REQUIRE(d.lip < 1.0);
  const auto phi = [&](const Point& y) {
    return Point{y[0] + interpolate(u.slice(0)[0], y), y[1] + interpolate(u.slice(0)[1], y)};
  };
  for (const Point x : {Point{0.3, 1.9}, Point{3.0, 3.0}, Point{5.5, 0.1}}) {
    const DiffeoInversion inv = invert_diffeo(d, 0.1, x);
    const Point back = phi(inv.y);
    CHECK(std::hypot(wrap_difference(back[0], x[0], g.length), wrap_difference(back[1], x[1], g.length)) <= 1e-12);
    for (std::size_t k = 1; k < inv.error_ratios.size(); ++k) CHECK(inv.error_ratios[k] <= d.lip + 1e-6);
    const DiffeoInversion again = invert_diffeo(d, 0.1, phi(x));
    CHECK(std::hypot(wrap_difference(again.y[0], x[0], g.length), wrap_difference(again.y[1], x[1], g.length)) <=
          1e-12 / (1.0 - d.lip));
  }
}

TEST_CASE("transformed coefficients of a constant drift") {
  const Grid g = build_grid(1, kTwoPi, 16);
  const double lambda = 16.0, c = 0.9;
  const TimeGridVector b = TimeGridVector::constant(GridVector::constant(g, {c, 0.0}), kT);
  const ParabolicSolution sol = mild_solve(b, lambda);
  const Diffeo d = build_diffeo(sol.u);
  const TransformedCoeffs tc = transform_coeffs(d, lambda);
  for (std::size_t k = 0; k < tc.b_hat.count(); ++k) {
    const double expected = c * (1.0 - std::exp(-lambda * (kT - tc.b_hat.times()[k])));
    REQUIRE((tc.b_hat.slice(k)[0] - GridScalar(g, expected)).max_abs() <= 1e-10);
    REQUIRE((tc.sigma_hat[0].slice(k)[0] - GridScalar(g, 1.0)).max_abs() <= 1e-10);
  }
}

TEST_CASE("sigma-hat columns reconstruct the determinant") {
  // The columns interpolate I + grad u entrywise while the reference interpolates its determinant,
  // so the two agree up to interpolation error.
  std::vector<double> gaps;
  for (int n : {16, 32}) {
    const Grid g = build_grid(2, kTwoPi, n);
    const Diffeo d = build_diffeo(mild_solve(drift_preset("rotation", g, kT), 16.0).u);
    const TransformedCoeffs tc = transform_coeffs(d, 16.0);
    const std::size_t k = tc.b_hat.count() / 2;
    const GridScalar det = jacobian_det_at_inverse(d, tc.b_hat.times()[k]);
    const GridVector& c0 = tc.sigma_hat[0].slice(k);
    const GridVector& c1 = tc.sigma_hat[1].slice(k);
    gaps.push_back((c0[0] * c1[1] - c0[1] * c1[0] - det).max_abs());
  }
  CHECK(gaps[0] <= 1e-4);
  CHECK(gaps[1] < gaps[0] / 4.0);
}

TEST_CASE("push-forward of a constant preserves mass") {
  const Grid g = build_grid(1, kTwoPi, 64);
  const Diffeo d = build_diffeo(shear(g, 0.3));
  const GridScalar h = pushforward_under_diffeo(GridScalar(g, 2.0), d, 0.2);
  CHECK(h.integral() == doctest::Approx(2.0 * g.length).epsilon(1e-6));
  CHECK((h - 2.0 * jacobian_det_at_inverse(d, 0.2).map([](double v) { return 1.0 / v; })).max_abs() <= 1e-12);
}

TEST_CASE("composition converges as the Lipschitz constant shrinks") {
  const Grid g = build_grid(1, kTwoPi, 64);
  const TimeGridVector b = drift_preset("trig", g, kT);
  const GridScalar target = scalar_preset("wave", g);
  double prev_lip = INFINITY, prev_err = INFINITY;
  for (double lambda : {4.0, 16.0, 64.0}) {
    const Diffeo d = build_diffeo(mild_solve(b, lambda).u);
    const double err = lp_norm(compose_inverse(target, d, 0.0) - target, 2.0);
    CHECK(d.lip < prev_lip);
    CHECK(err < prev_err);
    prev_lip = d.lip;
    prev_err = err;
  }
}

TEST_CASE("relaxation metrics vanish for zero data") {
  const Grid g = build_grid(1, kTwoPi, 16);
  const TimeGridVector zero = TimeGridVector::constant(GridVector(g), kT);
  const RelaxationMetrics m = relaxation_metrics(transform_coeffs(build_diffeo(zero), 4.0), zero, 4.0, 8.0, 2.0);
  CHECK(m.bhat_err == 0.0);
  CHECK(m.sigma_err == 0.0);
  CHECK(m.grad_sigma_err == 0.0);
  CHECK(m.div_err == 0.0);
  CHECK_THROWS_AS(relaxation_metrics(transform_coeffs(build_diffeo(zero), 4.0), zero, 4.0, 2.0, 2.0), Error);
  std::ostringstream os;
  write_relaxation_csv(os, {4.0}, {m});
  CHECK(os.str().rfind("# renormlab v1\n", 0) == 0);
}

TEST_CASE("transformed residual of the identity map equals the original ledger") {
  const Grid g = build_grid(1, kTwoPi, 32);
  const double T = 0.1;
  const TimeGridVector b = drift_preset("trig", g, T);
  const auto sig = diffusion_preset("unit", g, T);
  const FlowEnsemble e = simulate_member(b, sig, SdeConfig{1e-3, 1, 21}, 0);
  std::vector<GridScalar> fpath;
  for (int k = 0; k <= e.steps; ++k) fpath.push_back(pushforward_solution(scalar_preset("wave", g), e, k));
  const TestFunction phi = bump_test_function(g, {g.center(), 0.0}, g.length / 5.0);
  const Diffeo id = build_diffeo(TimeGridVector::constant(GridVector(g), T));
  TransformedCoeffs tc = transform_coeffs(id, 1.0);
  tc.b_hat = b;
  const WeakFormLedger t = transformed_residual(fpath, id, tc, phi, e.path);
  const WeakFormLedger o = residual_original(fpath, b, sig, phi, e.path);
  CHECK(t.residual == doctest::Approx(o.residual).epsilon(1e-10));
}
