#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "renormlab/error.hpp"
#include "renormlab/flow.hpp"
#include "renormlab/flow_io.hpp"
#include "renormlab/interpolate.hpp"
#include "renormlab/presets.hpp"
#include "renormlab/rng.hpp"

using namespace renormlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TimeGridVector zero_drift(const Grid& g, double T) { return TimeGridVector::constant(GridVector(g), T); }

}  // namespace

TEST_CASE("Philox4x64-10 known answers") {
  const PhiloxCounter ones = philox4x64({~0ULL, ~0ULL, ~0ULL, ~0ULL}, {~0ULL, ~0ULL});
  CHECK(ones == PhiloxCounter{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL});
  const PhiloxCounter pi = philox4x64({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                                      {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL});
  CHECK(pi == PhiloxCounter{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL});
}

TEST_CASE("normal streams are random access and distinct per member") {
  const NormalStream s(stream_id(42, 3));
  const double forward = s.normal(17);
  for (std::uint64_t i = 0; i < 17; ++i) (void)s.normal(i);
  CHECK(s.normal(17) == forward);
  CHECK(stream_id(42, 3) != stream_id(42, 4));
  CHECK(stream_id(42, 3) != stream_id(43, 3));
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal(std::uint64_t(i));
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) <= 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(sq / n - 1.0) <= 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("Brownian paths") {
  const BrownianPath a = sample_brownian(0.5, 1e-3, 2, 99);
  const BrownianPath b = sample_brownian(0.5, 1e-3, 2, 99);
  CHECK(a.steps == 500);
  CHECK(a.increments == b.increments);
  CHECK(sample_brownian(0.5, 1e-3, 0, 99).increments.empty());
  CHECK_THROWS_AS(sample_brownian(0.5, 3e-3, 1, 99), Error);

  const BrownianPath coarse = a.coarsen(4);
  CHECK(coarse.steps == 125);
  CHECK(coarse.dt == doctest::Approx(4e-3));
  for (int k = 0; k < 2; ++k) {
    const auto wf = a.cumulative(k), wc = coarse.cumulative(k);
    for (int s = 0; s <= coarse.steps; ++s) REQUIRE(std::abs(wc[std::size_t(s)] - wf[std::size_t(4 * s)]) <= 1e-14);
  }
  double sq = 0.0;
  for (double d : a.increments) sq += d * d;
  CHECK(std::abs(sq / double(a.increments.size()) / a.dt - 1.0) <= 0.15);
}

TEST_CASE("identity flow and additive noise are reproduced exactly") {
  const Grid g = build_grid(1, kTwoPi, 16);
  const double T = 0.2;
  const SdeConfig cfg{1e-2, 1, 5};
  const BrownianPath still = sample_brownian(T, cfg.dt, 0, 5);
  const FlowEnsemble id = simulate_flow(zero_drift(g, T), {}, cfg, still);
  for (int s = 0; s <= id.steps; ++s)
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(id.position(s, i)[0] == g.node(i)[0]);

  const BrownianPath path = sample_brownian(T, cfg.dt, 1, 5);
  FlowEnsemble e = simulate_flow(zero_drift(g, T), diffusion_preset("unit", g, T), cfg, path);
  const auto w = path.cumulative(0);
  for (int s = 0; s <= e.steps; ++s)
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(std::abs(e.position(s, i)[0] - g.node(i)[0] - w[std::size_t(s)]) <= 1e-12);

  variational_jacobian(e, zero_drift(g, T), diffusion_preset("unit", g, T));
  logdet_stochastic_exponential(e, zero_drift(g, T), diffusion_preset("unit", g, T));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(e.log_det_variational(e.steps, i)) <= 1e-12);
    CHECK(e.log_det_exponential(e.steps, i) == 0.0);
  }
}

TEST_CASE("contracting drift: Jacobian and log-determinant at a fixed point") {
  // b = -sin(x - c) fixes the center node, where d_x b = -1.
  const Grid g = build_grid(1, kTwoPi, 32);
  const double T = 0.5, c = g.center();
  const GridVector bv = GridVector::sample(g, [c](const Point& x) -> Point { return {-std::sin(x[0] - c), 0.0}; });
  const TimeGridVector b = TimeGridVector::constant(bv, T);
  for (double dt : {1e-2, 1e-3}) {
    const SdeConfig cfg{dt, 1, 1};
    FlowEnsemble e = simulate_flow(b, {}, cfg, sample_brownian(T, dt, 0, 1));
    variational_jacobian(e, b, {});
    logdet_stochastic_exponential(e, b, {});
    const std::size_t mid = static_cast<std::size_t>(g.points / 2);
    CHECK(std::abs(e.position(e.steps, mid)[0] - c) <= 1e-12);
    CHECK(std::abs(std::exp(e.log_det_variational(e.steps, mid)) - std::exp(-T)) <= 0.5 * dt);
    CHECK(e.log_det_exponential(e.steps, mid) == doctest::Approx(-T).epsilon(1e-12));
  }
}

TEST_CASE("flow inversion") {
  const Grid g = build_grid(1, kTwoPi, 64);
  const double T = 0.2;
  const SdeConfig cfg{1e-3, 1, 8};
  const BrownianPath path = sample_brownian(T, cfg.dt, 1, stream_id(8, 0));
  const FlowEnsemble shift = simulate_flow(zero_drift(g, T), diffusion_preset("unit", g, T), cfg, path);
  const InverseMap inv = invert_flow(shift, shift.steps);
  const double w = path.cumulative(0).back();
  for (std::size_t i = 0; i < g.size(); ++i) {
    REQUIRE(std::abs(wrap_difference(inv.point(i)[0], g.node(i)[0] - w, g.length)) <= 1e-10);
    REQUIRE(std::abs(inv.det[i] - 1.0) <= 1e-10);
  }

  // Round trip through the interpolated forward map on a multiplicative-noise flow.
  const TimeGridVector b = drift_preset("trig", g, T);
  const auto s = diffusion_preset("trig", g, T);
  const FlowEnsemble e = simulate_member(b, s, cfg, 0);
  const InverseMap psi = invert_flow(e, e.steps);
  GridScalar disp(g);
  for (std::size_t i = 0; i < g.size(); ++i) disp[i] = e.position(e.steps, i)[0] - g.node(i)[0];
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = psi.point(i)[0];
    REQUIRE(std::abs(wrap_difference(y + interpolate(disp, Point{y, 0.0}), g.node(i)[0], g.length)) <= 1e-8);
  }
}

TEST_CASE("flow property within interpolation tolerance") {
  const Grid g = build_grid(1, kTwoPi, 64);
  const double T = 0.2;
  const SdeConfig cfg{1e-3, 1, 3};
  const TimeGridVector b = drift_preset("trig", g, T);
  const auto s = diffusion_preset("trig", g, T);
  const BrownianPath path = sample_brownian(T, cfg.dt, 1, 3);
  const FlowEnsemble full = simulate_flow(b, s, cfg, path);
  const int mid = full.steps / 2;
  const FlowEnsemble tail = simulate_flow(b, s, cfg, path, mid);
  GridScalar disp(g);
  for (std::size_t i = 0; i < g.size(); ++i) disp[i] = tail.position(tail.steps, i)[0] - g.node(i)[0];
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x_mid = full.position(mid, i)[0];
    const double composed = x_mid + interpolate(disp, Point{x_mid, 0.0});
    REQUIRE(std::abs(composed - full.position(full.steps, i)[0]) <= 1e-4);
  }
}

TEST_CASE("push-forward solution") {
  const double T = 0.2;
  SUBCASE("translation") {
    const Grid g = build_grid(1, kTwoPi, 64);
    const SdeConfig cfg{1e-3, 1, 4};
    const BrownianPath path = sample_brownian(T, cfg.dt, 1, 4);
    const FlowEnsemble e = simulate_flow(zero_drift(g, T), diffusion_preset("unit", g, T), cfg, path);
    const GridScalar f0 = GridScalar::sample(g, [](const Point& x) { return std::cos(x[0]); });
    const double w = path.cumulative(0).back();
    const GridScalar expected = GridScalar::sample(g, [w](const Point& x) { return std::cos(x[0] - w); });
    CHECK((pushforward_solution(f0, e, e.steps) - expected).max_abs() <= 1e-5);
  }
  SUBCASE("constants under a divergence-free flow") {
    // det dPsi = 1 holds up to the O(dt) error of the Euler-Maruyama Jacobian.
    const Grid g = build_grid(2, kTwoPi, 16);
    const SdeConfig cfg{1e-3, 1, 6};
    const FlowEnsemble e = simulate_member(drift_preset("rotation", g, T), diffusion_preset("unit", g, T), cfg, 0);
    CHECK((pushforward_solution(GridScalar(g, 2.0), e, e.steps) - GridScalar(g, 2.0)).max_abs() <= 1e-3);
  }
  SUBCASE("mass within quadrature tolerance on every path") {
    const Grid g = build_grid(1, kTwoPi, 64);
    const TimeGridVector b = drift_preset("trig", g, T);
    const auto s = diffusion_preset("trig", g, T);
    const GridScalar f0 = scalar_preset("wave", g);
    const double tol = 10.0 * g.spacing() * g.spacing();
    for (std::uint64_t m = 0; m < 4; ++m) {
      const FlowEnsemble e = simulate_member(b, s, SdeConfig{1e-3, 4, 77}, m);
      for (int k = 0; k <= e.steps; k += 50) REQUIRE(std::abs(pushforward_solution(f0, e, k).integral() - f0.integral()) <= tol);
    }
  }
}

TEST_CASE("ensemble moments and the moment constant") {
  const std::vector<double> ones(10, 1.0);
  const MeanEstimate m = ensemble_moment(ones);
  CHECK(m.mean == 1.0);
  CHECK(m.stderr_ == 0.0);
  CHECK(ensemble_moment(std::vector<double>{1.0, 2.0, 3.0}, 2.0).mean == doctest::Approx(14.0 / 3.0));
  const Grid g = build_grid(1, kTwoPi, 16);
  CHECK(moment_bound_constant(zero_drift(g, 0.5), {}, 2.0, 10) == 4.0);
  CHECK(moment_bound_constant(zero_drift(g, 0.5), diffusion_preset("trig", g, 0.5), 2.0, 10) > 4.0);
}

TEST_CASE("flo round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "renormlab_test_flo";
  std::filesystem::create_directories(dir);
  const Grid g = build_grid(2, kTwoPi, 8);
  const FlowEnsemble e = simulate_member(drift_preset("trig", g, 0.1), diffusion_preset("trig", g, 0.1), SdeConfig{1e-2, 1, 12}, 0);
  write_flo(dir / "e.flo", e);
  const FlowEnsemble back = read_flo(dir / "e.flo");
  CHECK(back.grid == e.grid);
  CHECK(back.steps == e.steps);
  CHECK(back.positions == e.positions);
  CHECK(back.jacobians == e.jacobians);
  CHECK(back.logdets == e.logdets);
  CHECK(back.path.increments == e.path.increments);
  CHECK(flo_header(dir / "e.flo").find("\"grid\"") != std::string::npos);
  std::filesystem::remove_all(dir);
}
