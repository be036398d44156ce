#pragma once

#include <cstdint>

#include "dmc/core/time_grid.hpp"
#include "dmc/forward/delay_system.hpp"

namespace dmc {

/// Parameters of seeded random test instances. Draw order (CounterRng):
/// A, A1 (row-major, U[-scale, scale]); M coefficients C_0 (U[-scale, scale])
/// and C_1 (U[-scale/2, scale/2]); Mtilde likewise; B (U[-1, 1]); history
/// c0, c1 (U[-1, 1]) with phi(theta) = c0 + c1 theta.
struct RandomSystemOptions {
  double T = 1.0;
  double h = 0.25;
  double scale = 0.5;
  double kernel_rate = -1.0;
  bool with_delay = true;
  bool with_memory = true;
  bool history_pulse = false;  // phi = c0 at theta = 0, zero before
};

DelaySystem random_system(int n, int m, std::uint64_t seed,
                          const TimeGrid& grid,
                          const RandomSystemOptions& opts = {});

/// u(t) = a + b sin(2 pi t / T) with a, b ~ U[-1, 1]^m.
NodeSignal random_control(int m, std::uint64_t seed, const TimeGrid& grid);

}  // namespace dmc
