#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "renormlab/error.hpp"
#include "renormlab/flow.hpp"
#include "renormlab/presets.hpp"
#include "renormlab/weakform.hpp"

using namespace renormlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kT = 0.1;

struct Sample {
  Grid grid;
  TimeGridVector b;
  std::vector<TimeGridVector> sigmas;
  FlowEnsemble flow;
  std::vector<GridScalar> fpath;
};

Sample trig_sample() {
  Sample s{build_grid(1, kTwoPi, 32), {}, {}, {}, {}};
  s.b = drift_preset("trig", s.grid, kT);
  s.sigmas = diffusion_preset("trig", s.grid, kT);
  s.flow = simulate_member(s.b, s.sigmas, SdeConfig{1e-3, 1, 31}, 0);
  const GridScalar f0 = scalar_preset("wave", s.grid);
  for (int k = 0; k <= s.flow.steps; ++k) s.fpath.push_back(pushforward_solution(f0, s.flow, k));
  return s;
}

double central_difference(auto&& fn, double z, double h = 1e-5) { return (fn(z + h) - fn(z - h)) / (2.0 * h); }

}  // namespace

TEST_CASE("renormalizer derivatives match finite differences") {
  for (const Renormalizer& r : {make_renormalizer(RenormalizerTag::Tanh), make_renormalizer(RenormalizerTag::AbsEps, 0.3),
                                make_renormalizer(RenormalizerTag::Linear), make_renormalizer(RenormalizerTag::Constant, 2.0)}) {
    for (double z : {-4.1, -1.7, -0.2, 0.05, 0.29, 0.8, 2.5, 5.9}) {
      CHECK(r.d1(z) == doctest::Approx(central_difference([&](double y) { return r.gamma(y); }, z)).epsilon(1e-6));
      CHECK(r.d2(z) == doctest::Approx(central_difference([&](double y) { return r.d1(y); }, z)).epsilon(1e-6));
      CHECK(r.g(z) == doctest::Approx(z * r.d1(z) - r.gamma(z)).epsilon(1e-12));
      CHECK(r.h(z) == doctest::Approx(z * central_difference([&](double y) { return r.g(y); }, z) - r.g(z)).epsilon(1e-6));
    }
  }
  const Renormalizer t = make_renormalizer(RenormalizerTag::Tanh);
  const double z = 0.7, sech2 = 1.0 / (std::cosh(z) * std::cosh(z));
  CHECK(t.g(z) == doctest::Approx(z * sech2 - std::tanh(z)).epsilon(1e-14));
  CHECK_THROWS_AS(make_renormalizer(RenormalizerTag::AbsEps, 0.0), Error);
}

TEST_CASE("smoothed absolute value family") {
  const std::vector<double> zs = {-3.0, -0.5, -0.01, 0.0, 0.02, 0.4, 1.5, 7.0};
  for (double z : zs) {
    double previous = INFINITY;
    for (double eps : {0.5, 0.1, 0.02, 0.004}) {
      const Renormalizer r = make_renormalizer(RenormalizerTag::AbsEps, eps);
      const double gap = std::abs(r.gamma(z) - std::abs(z)) + std::abs(r.g(z)) + std::abs(r.h(z));
      CHECK(gap <= previous + 1e-15);
      CHECK(r.gamma(z) / (1.0 + std::abs(z)) <= 1.0);
      previous = gap;
    }
    CHECK(previous <= 0.01);
  }
  // C^1 matching of the parabolic piece at |z| = eps.
  const ParabolicAbs a{0.2};
  CHECK(a.value(0.2) == doctest::Approx(0.2));
  CHECK(a.d1(0.2 - 1e-12) == doctest::Approx(1.0));
  const PlateauCutoff b{0.2};
  CHECK(b.value(5.0) == 1.0);
  CHECK(b.value(10.0) == 0.0);
}

TEST_CASE("test functions") {
  const Grid g = build_grid(2, kTwoPi, 32);
  const TestFunction phi = bump_test_function(g, {g.center(), g.center()}, g.length / 8.0);
  CHECK(phi.values.max_abs() <= 1.0);
  CHECK(phi.values.integral() > 0.0);
  CHECK_THROWS_AS(bump_test_function(g, {g.center(), g.center()}, 0.3 * g.length), Error);
}

TEST_CASE("constant data under additive noise gives an empty ledger") {
  const Grid g = build_grid(2, kTwoPi, 16);
  const BrownianPath path = sample_brownian(kT, 1e-2, 2, 3);
  const std::vector<GridScalar> fpath(std::size_t(path.steps + 1), GridScalar(g, 1.5));
  const TestFunction phi = bump_test_function(g, {g.center(), g.center()}, g.length / 6.0);
  const TimeGridVector b = TimeGridVector::constant(GridVector(g), kT);
  const WeakFormLedger led = residual_original(fpath, b, diffusion_preset("unit", g, kT), phi, path);
  for (const auto& [name, v] : led.terms) CHECK(std::abs(v) <= 1e-9);
  CHECK(std::abs(led.residual) <= 1e-9);
  const WeakFormLedger ren =
      residual_renormalized(fpath, b, diffusion_preset("unit", g, kT), phi, make_renormalizer(RenormalizerTag::Tanh), path);
  CHECK(std::abs(ren.residual) <= 1e-9);
}

TEST_CASE("ledger is linear in the test function") {
  const Sample s = trig_sample();
  const TestFunction phi = bump_test_function(s.grid, {s.grid.center(), 0.0}, s.grid.length / 5.0);
  TestFunction scaled = phi;
  scaled.values *= -2.5;
  const double r1 = residual_original(s.fpath, s.b, s.sigmas, phi, s.flow.path).residual;
  const double r2 = residual_original(s.fpath, s.b, s.sigmas, scaled, s.flow.path).residual;
  CHECK(std::abs(r2 + 2.5 * r1) <= 1e-12 * std::max(1.0, std::abs(r1)));
}

TEST_CASE("linear renormalizer reduces to the original ledger") {
  const Sample s = trig_sample();
  const TestFunction phi = bump_test_function(s.grid, {s.grid.center(), 0.0}, s.grid.length / 5.0);
  const WeakFormLedger orig = residual_original(s.fpath, s.b, s.sigmas, phi, s.flow.path);
  const WeakFormLedger ren =
      residual_renormalized(s.fpath, s.b, s.sigmas, phi, make_renormalizer(RenormalizerTag::Linear), s.flow.path);
  for (const auto& [name, v] : orig.terms) CHECK(ren.term(name) == doctest::Approx(v).epsilon(1e-12));
  for (const auto& name : renormalized_term_names())
    if (name.find('G') != std::string::npos || name.find('H') != std::string::npos) CHECK(std::abs(ren.term(name)) <= 1e-14);
  CHECK(ren.residual == doctest::Approx(orig.residual).epsilon(1e-10));
  std::ostringstream os;
  write_csv(os, ren);
  CHECK(os.str().rfind("# renormlab v1\n", 0) == 0);
}

TEST_CASE("flipping a ledger term changes the residual by twice the term") {
  const Sample s = trig_sample();
  const TestFunction phi = bump_test_function(s.grid, {s.grid.center(), 0.0}, s.grid.length / 5.0);
  const Renormalizer tanh = make_renormalizer(RenormalizerTag::Tanh);
  const WeakFormLedger base = residual_renormalized(s.fpath, s.b, s.sigmas, phi, tanh, s.flow.path);
  const WeakFormLedger flipped = residual_renormalized(s.fpath, s.b, s.sigmas, phi, tanh, s.flow.path, {"G_div_b"});
  CHECK(flipped.residual - base.residual == doctest::Approx(2.0 * base.term("G_div_b")).epsilon(1e-9));
  CHECK_THROWS_AS(residual_renormalized(s.fpath, s.b, s.sigmas, phi, tanh, s.flow.path, {"no_such_term"}), Error);
}

TEST_CASE("stability functional") {
  const Grid g = build_grid(1, kTwoPi, 32);
  const TimeGridVector b = drift_preset("trig", g, kT);
  const auto sig = diffusion_preset("trig", g, kT);
  auto member = [&](std::size_t m) { return simulate_member(b, sig, SdeConfig{1e-3, 4, 9}, m); };
  const StabilitySeries zero = weighted_l1_stability(GridScalar(g), 4, member, b, sig);
  for (double v : zero.mean) CHECK(v == 0.0);
  const StabilitySeries ser = weighted_l1_stability(scalar_preset("wave", g), 4, member, b, sig);
  CHECK(ser.mean.front() == doctest::Approx(ser.envelope.front()).epsilon(1e-12));
  for (std::size_t k = 1; k < ser.envelope.size(); ++k) CHECK(ser.envelope[k] >= ser.envelope[k - 1]);
  CHECK(ser.c1 == doctest::Approx(0.5 * (1.0 + std::numbers::sqrt2) * 3.0));
  CHECK(ser.c2 == doctest::Approx(18.0));
}
