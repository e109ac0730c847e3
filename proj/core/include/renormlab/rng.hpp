#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace renormlab {

using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

/// Philox4x64-10 block function (Salmon et al. counter-based generator).
PhiloxCounter philox4x64(PhiloxCounter counter, PhiloxKey key);

/// Stream identifier for ensemble member `member` of a run seeded with `master_seed`.
std::uint64_t stream_id(std::uint64_t master_seed, std::uint64_t member);

/// Random-access standard normal sequence of one stream (Box-Muller on Philox blocks).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t stream) : key_{stream, 0x6A09E667F3BCC908ULL} {}
  /// The i-th standard normal of the stream; independent of evaluation order.
  double normal(std::uint64_t i) const;
  /// Uniform on (0, 1) at position i of the stream.
  double uniform(std::uint64_t i) const;

 private:
  PhiloxKey key_;
};

/// Increments of k_count independent Wiener processes on a uniform grid of [0, T].
struct BrownianPath {
  double final_time = 0.0;
  double dt = 0.0;
  int steps = 0;
  int k_count = 0;
  std::uint64_t stream = 0;
  std::vector<double> increments;  ///< [step * k_count + k]

  double increment(int step, int k) const {
    return increments[static_cast<std::size_t>(step) * static_cast<std::size_t>(k_count) + static_cast<std::size_t>(k)];
  }
  /// W^k at step boundaries, starting from W^k_0 = 0.
  std::vector<double> cumulative(int k) const;
  /// Path on a grid `factor` times coarser: increments summed in groups, same realization.
  BrownianPath coarsen(int factor) const;
};

/// Requires T / dt integral within round-off. The path depends only on (T, dt, k_count, stream).
BrownianPath sample_brownian(double T, double dt, int k_count, std::uint64_t stream);

/// As sample_brownian with the step count given directly. Refinement studies sample the finest path
/// once and coarsen it, so every resolution sees the same realization.
BrownianPath sample_brownian_steps(double T, int steps, int k_count, std::uint64_t stream);

}  // namespace renormlab
