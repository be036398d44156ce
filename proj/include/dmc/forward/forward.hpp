#pragma once

#include <vector>

#include "dmc/core/memory_kernel.hpp"
#include "dmc/core/trajectory.hpp"
#include "dmc/forward/delay_system.hpp"

namespace dmc {

/// Implicit Euler with method of steps. Step k -> k+1 solves
///
///   (I - dt A - dt^2/2 M(0)) y_{k+1}
///       = y_k + dt (A1 y_{k-D} + Q_{k+1} + B_{k+1} u_{k+1}),
///
/// where D = delay_steps, the delayed sample y_{k-D} is read at the left end
/// of the step (always known), and Q_{k+1} is the trapezoid sum
/// dt (M(t_{k+1}) y_0 / 2 + sum_{j=1..k} M(t_{k+1-j}) y_j). The M(0) y_{k+1}/2
/// endpoint is carried on the left-hand side.
class ForwardSolver {
 public:
  ForwardSolver(const DelaySystem& sys, const TimeGrid& grid);

  /// control: m x (n_steps + 1) node samples; an empty matrix means u = 0.
  Trajectory run(const HistoryFunction& history, const NodeSignal& control) const;

  /// Adds the response to an extra state forcing f (n x (n_steps+1)) applied
  /// like B u; used by linear-response computations.
  Trajectory run_forced(const HistoryFunction& history,
                        const NodeSignal& control,
                        const NodeSignal* state_forcing) const;

  const TimeGrid& grid() const { return grid_; }
  const DelaySystem& system() const { return *sys_; }
  const LagTable& lags() const { return lags_; }

  /// Solves (I - dt A - dt^2/2 M(0))^T x = rhs in place.
  void solve_transposed(double* rhs) const;

 private:
  const DelaySystem* sys_;
  TimeGrid grid_;
  LagTable lags_;
  Eigen::PartialPivLU<Mat> lu_;
};

Trajectory simulate_forward(const DelaySystem& sys, const NodeSignal& control,
                            const TimeGrid& grid);

/// Fundamental matrix S(t) of y' = A y + A1 y(t-h) on the grid nodes 0..N.
struct FundamentalSolution {
  TimeGrid grid;
  std::vector<Mat> samples;
  double bound = 0.0;  // max over nodes of the spectral norm

  const Mat& at(int k) const { return samples.at(static_cast<std::size_t>(k)); }
};

/// Column i is the forward run with M = 0, u = 0, history zero on [-h, 0)
/// and e_i at theta = 0.
FundamentalSolution fundamental_solution(const DelaySystem& sys,
                                         const TimeGrid& grid);

/// Max-norm gap between y(T) from the forward run and the representation
///   S(T) phi(0) + int_0^T S(T-s) [B u(s) + int_0^s M(s-r) y(r) dr] ds
/// evaluated by trapezoid quadrature. Requires phi = 0 on [-h, 0).
double mild_solution_check(const DelaySystem& sys, const NodeSignal& control,
                           const TimeGrid& grid);

}  // namespace dmc
