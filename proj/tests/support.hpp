#pragma once

#include <cmath>
#include <vector>

#include "dmc/forward/delay_system.hpp"

namespace dmc::test {

inline Mat scalar(double v) { return Mat::Constant(1, 1, v); }

// Scalar system y' = a y + a1 y(t-h) + memory + b u with zero kernels.
inline DelaySystem scalar_system(double a, double a1, double b, double h, double T,
                                 const TimeGrid& grid, double phi0 = 1.0) {
  DelaySystem sys;
  sys.A = scalar(a);
  sys.A1 = scalar(a1);
  sys.M = MemoryKernel::zero(1);
  sys.Mtilde = MemoryKernel::zero(1);
  sys.B = ControlMap::constant(scalar(b));
  sys.h = h;
  sys.T = T;
  sys.history = HistoryFunction::constant(Vec::Constant(1, phi0), grid);
  return sys;
}

// The scalar pure-memory instance: A=-1, A1=0, M=Mt=e^{-t}, B=1, pulse history.
inline DelaySystem pure_memory_system(const TimeGrid& grid) {
  DelaySystem sys;
  sys.A = scalar(-1.0);
  sys.A1 = scalar(0.0);
  sys.M = MemoryKernel::scalar_exp_poly(1, -1.0, {1.0});
  sys.Mtilde = MemoryKernel::scalar_exp_poly(1, -1.0, {1.0});
  sys.B = ControlMap::constant(scalar(1.0));
  sys.h = grid.delay();
  sys.T = grid.t_end;
  sys.history = HistoryFunction::pulse(Vec::Constant(1, 1.0), grid);
  return sys;
}

inline double rel_diff(const Mat& a, const Mat& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace dmc::test
