#pragma once

namespace dmc {

/// Uniform grid on [t_start, t_end] with a delay window of delay_steps nodes.
/// Node k sits at t_start + k * dt; negative k address the history segment.
struct TimeGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  int n_steps = 0;
  int delay_steps = 0;

  /// Grid with n_steps equal steps on [t_start, t_end]. The delay must be an
  /// integer multiple of the resulting dt.
  static TimeGrid uniform(double t_end, int n_steps, double delay,
                          double t_start = 0.0);

  /// Grid from a step size; (t_end - t_start) / dt and delay / dt must both
  /// be integers up to rounding.
  static TimeGrid with_step(double t_start, double t_end, double dt,
                            double delay);

  double time(int k) const { return t_start + k * dt; }
  double delay() const { return delay_steps * dt; }
  double horizon() const { return t_end - t_start; }

  /// Grid index of time t; throws kGrid when t is not within 1e-9*dt of a node.
  int index_of(double t) const;

  /// Same grid refined by an integer factor.
  TimeGrid refined(int factor) const;
};

}  // namespace dmc
