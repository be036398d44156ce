#pragma once

#include "dmc/core/memory_kernel.hpp"
#include "dmc/core/trajectory.hpp"
#include "dmc/forward/delay_system.hpp"

namespace dmc {

/// Solution of the adjoint system
///
///   -w'(t) = A^T w(t) + A1^T w(t+h) + int_t^T M(s-t)^T w(s) ds
///            - Mtilde(T-t)^T z_T,
///   w(T) = w_T,  w = 0 on (T, T+h].
///
/// The trajectory spans nodes first_node .. n_steps + delay_steps. When the
/// kernels reach T + h it starts at -delay_steps (the backward sweep is
/// continued through the history window); otherwise at 0.
struct AdjointData {
  Vec w_T;
  Vec z_T;
  Trajectory traj;
  NodeSignal observation;  // m x (n_steps + 1): B(t_k)^T w(t_k)
};

/// Backward implicit Euler. Step k+1 -> k solves
///
///   (I - dt A^T - dt^2/2 M(0)^T) w_k
///       = w_{k+1} + dt (A1^T w_{k+1+D} + F_k - Mtilde(T - t_k)^T z_T),
///
/// with F_k the trapezoid sum over the already computed nodes k+1..N of
/// M(t_j - t_k)^T w_j (weight dt/2 at j = N).
class AdjointSolver {
 public:
  AdjointSolver(const DelaySystem& sys, const TimeGrid& grid,
                bool extend_into_history = true);

  AdjointData run(const Vec& w_T, const Vec& z_T) const;

  bool extends_into_history() const { return extend_; }
  const TimeGrid& grid() const { return grid_; }

 private:
  const DelaySystem* sys_;
  TimeGrid grid_;
  bool extend_;
  LagTable m_lags_;
  LagTable mt_lags_;
  Eigen::PartialPivLU<Mat> lu_;
};

AdjointData simulate_adjoint(const DelaySystem& sys, const Vec& w_T,
                             const Vec& z_T, const TimeGrid& grid);

/// Residual of the differentiated adjoint system satisfied by phi = w':
///
///   phi' = -A^T phi - A1^T phi(t+h) - int_t^T M(s-t)^T phi(s) ds
///          + M(T-t)^T w_T - Mtilde'(T-t)^T z_T,
///   phi(T) = -A^T w_T + Mtilde(0)^T z_T.
///
/// phi and phi' come from centered differences of the discrete w. Nodes
/// within two steps of T-h and T-2h (where w' jumps and phi' kinks) are
/// skipped. Returns the max-norm residual over the remaining nodes,
/// including the terminal value. Needs analytic kernels.
double adjoint_time_derivative_residual(const DelaySystem& sys,
                                        const AdjointData& adj);

}  // namespace dmc
