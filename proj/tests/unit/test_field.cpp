#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "renormlab/error.hpp"
#include "renormlab/field_io.hpp"
#include "renormlab/mollifier.hpp"
#include "renormlab/spectral.hpp"

using namespace renormlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

// Independent minimum-image displacement of a node from the origin node.
Point displacement(const Grid& g, std::size_t node) {
  const auto n = static_cast<std::size_t>(g.points);
  const auto wrap = [&](std::size_t i) { return (i < n / 2 ? double(i) : double(i) - double(n)) * g.spacing(); };
  if (g.dim == 1) return {wrap(node), 0.0};
  return {wrap(node / n), wrap(node % n)};
}

GridScalar random_field(const Grid& g, unsigned seed) {
  // Deterministic pseudo-random smooth-free data: a cheap LCG is enough here.
  GridScalar f(g);
  unsigned s = seed;
  for (std::size_t k = 0; k < f.size(); ++k) {
    s = s * 1664525u + 1013904223u;
    f[k] = double(s >> 8) / double(1u << 24) - 0.5;
  }
  return f;
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid g1 = build_grid(1, kTwoPi, 64);
  CHECK(g1.spacing() == doctest::Approx(kTwoPi / 64).epsilon(1e-15));
  CHECK(build_grid(2, kTwoPi, 32).size() == 1024);
  CHECK(code_of([] { build_grid(1, kTwoPi, 7); }) == ErrorCode::OddN);
  CHECK(code_of([] { build_grid(3, kTwoPi, 8); }) == ErrorCode::BadDimension);
  CHECK(code_of([] { build_grid(1, -1.0, 8); }) == ErrorCode::BadLength);
  CHECK(code_of([] { build_grid(1, 1.0, 6); }) == ErrorCode::TooSmallN);
}

TEST_CASE("mollifier mass, support and symmetry") {
  for (int dim : {1, 2}) {
    const Grid g = build_grid(dim, kTwoPi, dim == 1 ? 128 : 48);
    for (double eps : {2.0 * g.spacing(), g.length / 16.0, g.length / 4.0}) {
      const MollifierKernel k = mollifier(g, eps);
      CHECK(std::abs(k.values.integral() - 1.0) <= 1e-10);
      const auto n = static_cast<std::size_t>(g.points);
      const std::size_t rows = dim == 2 ? n : 1;
      for (std::size_t node = 0; node < g.size(); ++node) {
        const Point x = displacement(g, node);
        const double r = std::hypot(x[0], x[1]);
        if (r >= eps) REQUIRE(k.values[node] == 0.0);
        else REQUIRE(k.values[node] > 0.0);
        const std::size_t i = dim == 2 ? node / n : node, j = dim == 2 ? node % n : 0;
        const std::size_t mirror = dim == 2 ? ((n - i) % n) * n + (rows - j) % rows : (n - i) % n;
        REQUIRE(k.values[node] == k.values[mirror]);
      }
    }
  }
  const Grid g = build_grid(1, kTwoPi, 64);
  CHECK(code_of([&] { mollifier(g, g.spacing()); }) == ErrorCode::EpsilonOutOfRange);
  CHECK(code_of([&] { mollifier(g, g.length / 3.0); }) == ErrorCode::EpsilonOutOfRange);
}

TEST_CASE("convolution with the mollifier") {
  const Grid g = build_grid(1, kTwoPi, 128);
  const GridScalar c(g, 2.5);
  const GridScalar cosx = GridScalar::sample(g, [](const Point& x) { return std::cos(x[0]); });
  double previous = 1.0;
  for (double eps : {g.length / 4.0, g.length / 8.0, g.length / 16.0, g.length / 32.0}) {
    const MollifierKernel k = mollifier(g, eps);
    CHECK((convolve(c, k) - c).max_abs() <= 1e-12);
    // cos is an eigenfunction: eta * cos = m cos with m = sum eta(x) cos(x) h.
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) m += k.values[i] * std::cos(displacement(g, i)[0]) * g.spacing();
    const GridScalar conv = convolve(cosx, k);
    CHECK((conv - m * cosx).max_abs() <= 1e-12);
    const double err = (conv - cosx).max_abs();
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("spectral derivatives") {
  const Grid g = build_grid(1, kTwoPi, 64);
  const GridScalar s = GridScalar::sample(g, [](const Point& x) { return std::sin(x[0]); });
  const GridScalar c = GridScalar::sample(g, [](const Point& x) { return std::cos(x[0]); });
  CHECK((spectral_derivative(s, {1, 0}) - c).max_abs() <= 1e-10);
  CHECK((spectral_derivative(s, {2, 0}) + s).max_abs() <= 1e-10);
  CHECK(spectral_derivative(GridScalar(g, 3.0), {1, 0}).max_abs() <= 1e-12);

  const Grid g2 = build_grid(2, kTwoPi, 32);
  const GridScalar f = GridScalar::sample(g2, [](const Point& x) { return std::sin(x[0]) * std::cos(2.0 * x[1]); });
  CHECK((divergence(gradient(f)) - laplacian(f)).max_abs() <= 1e-10);
  const GridScalar fxy = GridScalar::sample(g2, [](const Point& x) { return -2.0 * std::cos(x[0]) * std::sin(2.0 * x[1]); });
  CHECK((spectral_derivative(f, {1, 1}) - fxy).max_abs() <= 1e-10);
}

TEST_CASE("Parseval and convolution commuting with differentiation") {
  for (int dim : {1, 2}) {
    const Grid g = build_grid(dim, kTwoPi, 32);
    const GridScalar f = random_field(g, 7u + unsigned(dim));
    const double l2sq = inner(f, f);
    CHECK(std::abs(spectral_energy(f) - l2sq) <= 1e-8 * l2sq);
    const MollifierKernel k = mollifier(g, g.length / 8.0);
    for (int d = 0; d < dim; ++d) {
      const MultiIndex a = MultiIndex::axis(d);
      const GridScalar lhs = spectral_derivative(convolve(f, k), a);
      const GridScalar rhs = convolve(spectral_derivative(f, a), k);
      CHECK((lhs - rhs).max_abs() <= 1e-8 * lhs.max_abs());
    }
  }
}

TEST_CASE("Lp norms") {
  const Grid g = build_grid(1, kTwoPi, 64);
  CHECK(lp_norm(GridScalar(g, 1.0), 2.0) == doctest::Approx(std::sqrt(kTwoPi)).epsilon(1e-14));
  for (double p : {1.0, 2.0, 3.5, kInf}) CHECK(lp_norm(GridScalar(g), p) == 0.0);
  const GridScalar a = random_field(g, 1), b = random_field(g, 2);
  for (double p : {1.0, 1.5, 2.0, 4.0, kInf}) CHECK(lp_norm(a + b, p) <= lp_norm(a, p) + lp_norm(b, p) + 1e-14);
  CHECK_THROWS_AS(lp_norm(a, 0.5), Error);
}

TEST_CASE("kernel moments against integration by parts") {
  for (int dim : {1, 2}) {
    const Grid g = build_grid(dim, kTwoPi, 64);
    const MollifierKernel k = mollifier(g, g.length / 16.0);
    CHECK(kernel_moment(k, {0, 0}, {0, 0}) == doctest::Approx(1.0).epsilon(1e-8));
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        const double expected = i == j ? -1.0 : 0.0;
        CHECK(std::abs(kernel_moment(k, MultiIndex::axis(i), MultiIndex::axis(j)) - expected) <= 5e-3);
      }
    // x_i x_j against d_k d_l: delta_ik delta_jl + delta_il delta_jk.
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j)
        for (int kk = 0; kk < dim; ++kk)
          for (int l = kk; l < dim; ++l) {
            const double expected = double(i == kk && j == l) + double(i == l && j == kk);
            const double got = kernel_moment(k, MultiIndex::pair(i, j), MultiIndex::pair(kk, l));
            CHECK(std::abs(got - expected) <= 5e-3);
          }
  }
  const Grid g = build_grid(1, kTwoPi, 64);
  CHECK_THROWS_AS(kernel_moment(mollifier(g, 1.0), {3, 0}, {0, 0}), Error);
}

TEST_CASE("kernel moments are scale invariant up to discretization") {
  const Grid g = build_grid(1, kTwoPi, 256);
  const double coarse = kernel_moment(mollifier(g, g.length / 8.0), {2, 0}, {2, 0});
  const double fine = kernel_moment(mollifier(g, g.length / 32.0), {2, 0}, {2, 0});
  CHECK(std::abs(coarse - fine) <= 5e-3);
}

TEST_CASE("fld round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "renormlab_test_fld";
  std::filesystem::create_directories(dir);
  const Grid g = build_grid(2, 3.0, 16);
  const GridScalar f = random_field(g, 11);
  write_fld(dir / "f.fld", to_field_file(f));
  const GridScalar back = scalar_from(read_fld(dir / "f.fld"));
  CHECK(back.grid() == g);
  CHECK(back.values() == f.values());

  const TimeGridVector v = TimeGridVector::uniform(1.0, 3, [&](double t) {
    return GridVector::sample(g, [t](const Point& x) -> Point { return {std::sin(x[0] + t), t * std::cos(x[1])}; });
  });
  write_fld(dir / "v.fld", to_field_file(v));
  const FieldFile file = read_fld(dir / "v.fld");
  CHECK(file.components == 2);
  CHECK(file.times == v.times());
  const TimeGridVector vb = time_vector_from(file, 1.0);
  for (std::size_t k = 0; k < v.count(); ++k) CHECK((vb.slice(k) - v.slice(k)).max_abs() == 0.0);
  CHECK_THROWS_AS(read_fld(dir / "missing.fld"), Error);
  std::filesystem::remove_all(dir);
}
