#pragma once

#include <cstdint>

#include "dmc/core/memory_kernel.hpp"
#include "dmc/core/trajectory.hpp"

namespace dmc {

/// Composite trapezoid approximation of int_0^{t_k} M(t_k - s) y(s) ds
/// using the trajectory samples at nodes 0..t_index.
Vec convolve_memory(const Trajectory& traj, const MemoryKernel& kernel,
                    int t_index);

/// Trapezoid weight of node k in a sum over nodes [first, last] with step dt.
inline double trapezoid_weight(int k, int first, int last, double dt) {
  if (first == last) return 0.0;
  return (k == first || k == last) ? 0.5 * dt : dt;
}

/// Counter-based generator: draw i is splitmix64(seed + (i+1) * golden).
/// Any port that implements the same mixing reproduces identical instances.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z);

  std::uint64_t next_u64() { return mix(seed_ + (++counter_) * kGolden); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Box-Muller standard normal.
  double normal();

  Vec uniform_vec(int n, double lo, double hi);
  Mat uniform_mat(int rows, int cols, double lo, double hi);
  /// Uniformly distributed on the unit sphere in R^n.
  Vec unit_vector(int n);

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace dmc
