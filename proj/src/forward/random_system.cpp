#include "dmc/forward/random_system.hpp"

#include <cmath>
#include <numbers>

#include "dmc/core/quadrature.hpp"

namespace dmc {

DelaySystem random_system(int n, int m, std::uint64_t seed,
                          const TimeGrid& grid,
                          const RandomSystemOptions& opts) {
  CounterRng rng(seed);
  const double s = opts.scale;
  DelaySystem sys;
  sys.A = rng.uniform_mat(n, n, -s, s);
  sys.A1 = rng.uniform_mat(n, n, -s, s);
  Mat m0 = rng.uniform_mat(n, n, -s, s);
  Mat m1 = rng.uniform_mat(n, n, -0.5 * s, 0.5 * s);
  Mat mt0 = rng.uniform_mat(n, n, -s, s);
  Mat mt1 = rng.uniform_mat(n, n, -0.5 * s, 0.5 * s);
  Mat b = rng.uniform_mat(n, m, -1.0, 1.0);
  const Vec c0 = rng.uniform_vec(n, -1.0, 1.0);
  const Vec c1 = rng.uniform_vec(n, -1.0, 1.0);

  if (!opts.with_delay) sys.A1.setZero();
  if (opts.with_memory) {
    sys.M = MemoryKernel::exp_poly(opts.kernel_rate, {m0, m1});
    sys.Mtilde = MemoryKernel::exp_poly(opts.kernel_rate, {mt0, mt1});
  } else {
    sys.M = MemoryKernel::zero(n);
    sys.Mtilde = MemoryKernel::zero(n);
  }
  sys.B = ControlMap::constant(std::move(b));
  sys.h = opts.h;
  sys.T = opts.T;
  if (opts.history_pulse) {
    sys.history = HistoryFunction::pulse(c0, grid);
  } else {
    sys.history = HistoryFunction::from_function(
        n, grid, [&](double theta) -> Vec { return c0 + theta * c1; });
  }
  return sys;
}

NodeSignal random_control(int m, std::uint64_t seed, const TimeGrid& grid) {
  CounterRng rng(seed ^ 0xC0A7C0A7ULL);
  const Vec a = rng.uniform_vec(m, -1.0, 1.0);
  const Vec b = rng.uniform_vec(m, -1.0, 1.0);
  NodeSignal u(m, grid.n_steps + 1);
  const double T = grid.horizon();
  for (int k = 0; k <= grid.n_steps; ++k) {
    const double t = grid.time(k);
    u.col(k) = a + std::sin(2.0 * std::numbers::pi * t / T) * b;
  }
  return u;
}

}  // namespace dmc
