#include "dmc/duality/duality.hpp"

#include <cmath>

#include "dmc/core/quadrature.hpp"
#include "dmc/errors.hpp"
#include "dmc/forward/forward.hpp"

namespace dmc {

DualityReport duality_residual(const DelaySystem& sys, const NodeSignal& control,
                               const Vec& w_T, const Vec& z_T, double theta,
                               double t1, const TimeGrid& grid) {
  const Trajectory y = simulate_forward(sys, control, grid);
  const AdjointData adj = simulate_adjoint(sys, w_T, z_T, grid);
  return duality_residual(sys, control, y, adj, theta, t1);
}

DualityReport duality_residual(const DelaySystem& sys, const NodeSignal& control,
                               const Trajectory& y, const AdjointData& adj,
                               double theta, double t1) {
  const TimeGrid& g = y.grid;
  const int N = g.n_steps;
  const int D = g.delay_steps;
  const double dt = g.dt;
  const int a = g.index_of(theta);
  const int b = g.index_of(t1);
  require(a >= -D && a <= 0, ErrorKind::kGrid, "theta must lie in [-h, 0]");
  require(b >= N - D && b <= N, ErrorKind::kGrid, "T1 must lie in [T-h, T]");
  const Trajectory& w = adj.traj;
  require(w.has_node(a), ErrorKind::kPrecondition,
          "adjoint run does not reach theta (kernels must cover T + h)");

  const int n = sys.n();
  const Vec zero = Vec::Zero(n);
  auto y_at = [&](int k) -> Vec {
    return y.has_node(k) ? Vec(y.at(k)) : zero;
  };
  auto w_at = [&](int k) -> Vec {
    return w.has_node(k) ? Vec(w.at(k)) : zero;
  };
  const bool has_control = control.size() > 0;

  DualityReport r;
  r.theta = theta;
  r.t1 = t1;
  r.lhs = y.at(b).dot(w.at(b)) - w.at(a).dot(sys.history.at_node(a));

  const Mat A1t = sys.A1.transpose();
  Vec mt_y = Vec::Zero(n);
  for (int k = a; k <= b; ++k) {
    const double wt = trapezoid_weight(k, a, b, dt);
    if (wt == 0.0) continue;
    const Vec yk = y_at(k);
    const Vec wk = w_at(k);
    r.i1 += wt * (sys.A1 * y_at(k - D)).dot(wk);
    r.i2 -= wt * yk.dot(A1t * w_at(k + D));
    const Mat mt = sys.Mtilde.eval(g.time(N) - g.time(k));
    r.i3 += wt * yk.dot(mt.transpose() * adj.z_T);
    mt_y += wt * (mt * yk);
    if (has_control && k >= 0) {
      Vec bu = Vec::Zero(n);
      sys.B.apply(k, control.col(k).data(), 1.0, bu.data());
      r.i4 += wt * bu.dot(wk);
    }
  }
  r.i3_alt = mt_y.dot(adj.z_T);

  for (int k = a - D; k <= a; ++k) {
    r.i12_shifted +=
        trapezoid_weight(k, a - D, a, dt) * y_at(k).dot(A1t * w_at(k + D));
  }
  for (int k = b - D; k <= N - D; ++k) {
    r.i12_shifted -=
        trapezoid_weight(k, b - D, N - D, dt) * y_at(k).dot(A1t * w_at(k + D));
  }

  r.residual = std::abs(r.lhs - (r.i1 + r.i2 + r.i3 + r.i4));
  return r;
}

}  // namespace dmc
