#include "dmc/core/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "dmc/errors.hpp"

namespace dmc {

Vec convolve_memory(const Trajectory& traj, const MemoryKernel& kernel,
                    int t_index) {
  require(kernel.dim() == traj.dim(), ErrorKind::kShape,
          "kernel and trajectory dimensions differ");
  require(t_index >= 0 && t_index <= traj.grid.n_steps && traj.has_node(0) &&
              traj.has_node(t_index),
          ErrorKind::kRange, "memory convolution index outside [0, T]");
  Vec out = Vec::Zero(traj.dim());
  if (t_index == 0 || kernel.is_zero()) return out;
  const double dt = traj.grid.dt;
  const LagTable table(kernel, dt, t_index + 1);
  for (int j = 0; j <= t_index; ++j) {
    const double w = trapezoid_weight(j, 0, t_index, dt);
    table.accumulate(t_index - j, w, traj.data_at(j), out.data());
  }
  return out;
}

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec CounterRng::uniform_vec(int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
  return v;
}

Mat CounterRng::uniform_mat(int rows, int cols, double lo, double hi) {
  // Row-major draw order so ports with row-major storage match.
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
  }
  return m;
}

Vec CounterRng::unit_vector(int n) {
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v(i) = normal();
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace dmc
