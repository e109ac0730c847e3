#include "renormlab/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "renormlab/error.hpp"

namespace renormlab {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

__extension__ typedef unsigned __int128 uint128;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const uint128 p = static_cast<uint128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double to_open_unit(std::uint64_t u) { return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace

PhiloxCounter philox4x64(PhiloxCounter x, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, x[0], hi0, lo0);
    mulhilo(kMul1, x[2], hi1, lo1);
    x = {hi1 ^ x[1] ^ key[0], lo1, hi0 ^ x[3] ^ key[1], lo0};
  }
  return x;
}

std::uint64_t stream_id(std::uint64_t master_seed, std::uint64_t member) {
  return splitmix64(splitmix64(master_seed) ^ (member * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

double NormalStream::uniform(std::uint64_t i) const {
  const PhiloxCounter block = philox4x64({i / 4, 0, 0, 0}, key_);
  return to_open_unit(block[i % 4]);
}

double NormalStream::normal(std::uint64_t i) const {
  const PhiloxCounter block = philox4x64({i / 4, 0, 0, 0}, key_);
  const std::size_t pair = (i % 4) / 2;
  const double u1 = to_open_unit(block[2 * pair]);
  const double u2 = to_open_unit(block[2 * pair + 1]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (i % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

std::vector<double> BrownianPath::cumulative(int k) const {
  std::vector<double> w(static_cast<std::size_t>(steps) + 1, 0.0);
  for (int n = 0; n < steps; ++n) w[n + 1] = w[n] + increment(n, k);
  return w;
}

BrownianPath BrownianPath::coarsen(int factor) const {
  if (factor < 1 || steps % factor != 0) fail(ErrorCode::NonIntegralSteps, "coarsening factor must divide the step count");
  BrownianPath out{final_time, dt * factor, steps / factor, k_count, stream, {}};
  out.increments.assign(static_cast<std::size_t>(out.steps) * static_cast<std::size_t>(k_count), 0.0);
  for (int n = 0; n < out.steps; ++n)
    for (int k = 0; k < k_count; ++k) {
      double s = 0.0;
      for (int m = 0; m < factor; ++m) s += increment(n * factor + m, k);
      out.increments[static_cast<std::size_t>(n) * static_cast<std::size_t>(k_count) + static_cast<std::size_t>(k)] = s;
    }
  return out;
}

BrownianPath sample_brownian_steps(double T, int steps, int k_count, std::uint64_t stream) {
  if (!(T > 0.0) || steps < 1 || k_count < 0) fail(ErrorCode::NonIntegralSteps, "need T > 0, steps >= 1, k_count >= 0");
  BrownianPath p{T, T / steps, steps, k_count, stream, {}};
  p.increments.resize(static_cast<std::size_t>(steps) * static_cast<std::size_t>(k_count));
  const NormalStream normals(stream);
  const double scale = std::sqrt(p.dt);
  for (std::size_t i = 0; i < p.increments.size(); ++i) p.increments[i] = scale * normals.normal(i);
  return p;
}

BrownianPath sample_brownian(double T, double dt, int k_count, std::uint64_t stream) {
  if (!(T > 0.0) || !(dt > 0.0)) fail(ErrorCode::NonIntegralSteps, "need T > 0 and dt > 0");
  const double ratio = T / dt;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os << "T / dt = " << ratio << " is not an integer";
    fail(ErrorCode::NonIntegralSteps, os.str());
  }
  return sample_brownian_steps(T, static_cast<int>(steps), k_count, stream);
}

}  // namespace renormlab
