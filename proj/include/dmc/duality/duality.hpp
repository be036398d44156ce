#pragma once

#include "dmc/adjoint/adjoint.hpp"
#include "dmc/core/trajectory.hpp"
#include "dmc/forward/delay_system.hpp"

namespace dmc {

/// Both sides of the pairing identity
///
///   <y(T1), w(T1)> - <w(theta), phi(theta)> = I1 + I2 + I3 + I4,
///
///   I1 =  int_theta^T1 <A1 y(t-h), w(t)> dt
///   I2 = -int_theta^T1 <y(t), A1^T w(t+h)> dt
///   I3 =  int_theta^T1 <y(t), Mtilde(T-t)^T z_T> dt
///   I4 =  int_theta^T1 <B(t) u(t), w(t)> dt
///
/// all by trapezoid on the grid. y is taken as zero before -h and u as zero
/// before 0.
struct DualityReport {
  double lhs = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 0.0;
  double i4 = 0.0;
  /// I3 computed as <int Mtilde(T-t) y(t) dt, z_T>.
  double i3_alt = 0.0;
  /// I1 + I2 in the shifted-window form
  /// int_{theta-h}^{theta} <y, A1^T w(t+h)> - int_{T1-h}^{T-h} <y, A1^T w(t+h)>.
  double i12_shifted = 0.0;
  double residual = 0.0;
  double theta = 0.0;
  double t1 = 0.0;
};

/// Runs the forward and adjoint solvers and evaluates the identity.
/// theta in [-h, 0] and t1 in [T-h, T] must be grid nodes (kGrid otherwise).
DualityReport duality_residual(const DelaySystem& sys, const NodeSignal& control,
                               const Vec& w_T, const Vec& z_T, double theta,
                               double t1, const TimeGrid& grid);

/// Same, reusing precomputed runs (batches over (theta, t1)).
DualityReport duality_residual(const DelaySystem& sys, const NodeSignal& control,
                               const Trajectory& y, const AdjointData& adj,
                               double theta, double t1);

}  // namespace dmc
