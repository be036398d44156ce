#include "dmc/adjoint/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "dmc/core/quadrature.hpp"
#include "dmc/errors.hpp"
#include "dmc/simd/kernels.hpp"

namespace dmc {

AdjointSolver::AdjointSolver(const DelaySystem& sys, const TimeGrid& grid,
                             bool extend_into_history)
    : sys_(&sys), grid_(grid) {
  sys.validate(grid);
  const double reach = sys.T + sys.h;
  extend_ = extend_into_history &&
            sys.M.max_time() >= reach * (1.0 - 1e-12) &&
            sys.Mtilde.max_time() >= reach * (1.0 - 1e-12);
  const int span = grid.n_steps + grid.delay_steps + 1;
  const double dt = grid.dt;
  m_lags_ = LagTable(sys.M, dt, extend_ ? span : grid.n_steps + 1);
  mt_lags_ = LagTable(sys.Mtilde, dt, extend_ ? span : grid.n_steps + 1);
  const int n = sys.n();
  Mat E = Mat::Identity(n, n) - dt * sys.A.transpose() -
          0.5 * dt * dt * m_lags_.matrix(0).transpose();
  lu_.compute(E);
  if (!(lu_.rcond() > 1e-14)) {
    fail(ErrorKind::kStepFailure, "implicit adjoint step matrix is singular");
  }
}

AdjointData AdjointSolver::run(const Vec& w_T, const Vec& z_T) const {
  const DelaySystem& sys = *sys_;
  const int n = sys.n();
  const int N = grid_.n_steps;
  const int D = grid_.delay_steps;
  const double dt = grid_.dt;
  require(w_T.size() == n && z_T.size() == n, ErrorKind::kShape,
          "terminal data must have the state dimension");

  AdjointData adj;
  adj.w_T = w_T;
  adj.z_T = z_T;
  Trajectory& traj = adj.traj;
  traj.grid = grid_;
  const int first = extend_ ? -D : 0;
  traj.first_node = first;
  traj.values = Mat::Zero(n, N + D - first + 1);
  traj.at(N) = w_T;

  const bool forced = !mt_lags_.is_zero() && z_T.cwiseAbs().maxCoeff() > 0.0;
  const Mat A1t = sys.A1.transpose();
  const auto& kt = simd::active_table();
  Vec rhs(n);
  Vec drive(n);
  Vec weights(N + D + 2);
  for (int k = N - 1; k >= first; --k) {
    drive.noalias() = A1t * traj.at(k + 1 + D);
    if (!m_lags_.is_zero()) {
      // F_k = sum_{j=k+1}^{N} c_j M(t_j - t_k)^T w_j
      if (m_lags_.is_scalar()) {
        const int count = N - k;
        for (int j = k + 1; j <= N; ++j) {
          weights(j - k - 1) = (j == N ? 0.5 * dt : dt) * m_lags_.scalar(j - k);
        }
        const simd::ColMajorView view{
            traj.data_at(k + 1), static_cast<std::size_t>(n),
            static_cast<std::size_t>(count), static_cast<std::size_t>(n)};
        kt.gemv(1.0, view, weights.data(), drive.data());
      } else {
        for (int j = k + 1; j <= N; ++j) {
          m_lags_.accumulate(j - k, j == N ? 0.5 * dt : dt, traj.data_at(j),
                             drive.data(), /*transpose=*/true);
        }
      }
    }
    if (forced) {
      mt_lags_.accumulate(N - k, -1.0, z_T.data(), drive.data(),
                          /*transpose=*/true);
    }
    rhs = traj.at(k + 1) + dt * drive;
    traj.at(k) = lu_.solve(rhs);
  }
  if (!traj.values.allFinite()) {
    fail(ErrorKind::kNumerical, "adjoint run produced non-finite values");
  }

  adj.observation = NodeSignal::Zero(sys.m(), N + 1);
  for (int k = 0; k <= N; ++k) {
    sys.B.apply_transpose(k, traj.data_at(k), 1.0, adj.observation.col(k).data());
  }
  return adj;
}

AdjointData simulate_adjoint(const DelaySystem& sys, const Vec& w_T,
                             const Vec& z_T, const TimeGrid& grid) {
  return AdjointSolver(sys, grid).run(w_T, z_T);
}

double adjoint_time_derivative_residual(const DelaySystem& sys,
                                        const AdjointData& adj) {
  using Form = MemoryKernel::Form;
  require(sys.M.form() != Form::kSampled && sys.Mtilde.form() != Form::kSampled,
          ErrorKind::kUnsupportedKernel,
          "derivative residual needs analytic (zero/constant/exp-poly) kernels");
  const Trajectory& w = adj.traj;
  const TimeGrid& g = w.grid;
  const int n = sys.n();
  const int N = g.n_steps;
  const int D = g.delay_steps;
  const double dt = g.dt;
  const Mat At = sys.A.transpose();
  const Mat A1t = sys.A1.transpose();

  // phi at nodes lo..N; node N holds the terminal value from the ODE.
  const int lo = std::max(w.first_node + 1, 0);
  Mat phi = Mat::Zero(n, N + D + 1);  // column k <-> node k; zero beyond T
  for (int k = lo; k < N; ++k) {
    phi.col(k) = (w.at(k + 1) - w.at(k - 1)) / (2.0 * dt);
  }
  const Vec phi_T =
      -At * adj.w_T + sys.Mtilde.eval(0.0).transpose() * adj.z_T;
  phi.col(N) = phi_T;

  double worst = ((w.at(N) - w.at(N - 1)) / dt - phi_T).cwiseAbs().maxCoeff();

  auto near = [&](int k, int anchor) { return std::abs(k - anchor) <= 2; };
  const LagTable m_lags(sys.M, dt, N + 1);
  for (int k = lo + 1; k <= N - 2; ++k) {
    if (near(k, N - D) || near(k, N - 2 * D)) continue;
    const Vec dphi = (phi.col(k + 1) - phi.col(k - 1)) / (2.0 * dt);
    Vec rhs = -At * phi.col(k);
    if (k + D < N) rhs -= A1t * phi.col(k + D);
    Vec mem = Vec::Zero(n);
    for (int j = k; j <= N; ++j) {
      m_lags.accumulate(j - k, trapezoid_weight(j, k, N, dt), phi.col(j).data(),
                        mem.data(), /*transpose=*/true);
    }
    rhs -= mem;
    const double lag = g.time(N) - g.time(k);
    rhs += sys.M.eval(lag).transpose() * adj.w_T;
    rhs -= sys.Mtilde.derivative(lag).transpose() * adj.z_T;
    worst = std::max(worst, (dphi - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace dmc
