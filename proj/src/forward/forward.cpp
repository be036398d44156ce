#include "dmc/forward/forward.hpp"

#include <algorithm>
#include <cmath>

#include "dmc/core/quadrature.hpp"
#include "dmc/errors.hpp"
#include "dmc/simd/kernels.hpp"

namespace dmc {

namespace {

constexpr double kMinRcond = 1e-14;

}  // namespace

ForwardSolver::ForwardSolver(const DelaySystem& sys, const TimeGrid& grid)
    : sys_(&sys), grid_(grid) {
  sys.validate(grid);
  const double dt = grid.dt;
  lags_ = LagTable(sys.M, dt, grid.n_steps + grid.delay_steps + 2);
  const int n = sys.n();
  Mat E = Mat::Identity(n, n) - dt * sys.A - 0.5 * dt * dt * lags_.matrix(0);
  lu_.compute(E);
  if (!(lu_.rcond() > kMinRcond)) {
    fail(ErrorKind::kStepFailure,
         "implicit step matrix I - dt A - dt^2/2 M(0) is singular");
  }
}

void ForwardSolver::solve_transposed(double* rhs) const {
  Eigen::Map<Vec> x(rhs, sys_->n());
  x = lu_.transpose().solve(Vec(x));
}

Trajectory ForwardSolver::run(const HistoryFunction& history,
                              const NodeSignal& control) const {
  return run_forced(history, control, nullptr);
}

Trajectory ForwardSolver::run_forced(const HistoryFunction& history,
                                     const NodeSignal& control,
                                     const NodeSignal* state_forcing) const {
  const DelaySystem& sys = *sys_;
  const int n = sys.n();
  const int N = grid_.n_steps;
  const int D = grid_.delay_steps;
  const double dt = grid_.dt;
  require(history.dim() == n && history.delay_steps() == D, ErrorKind::kShape,
          "history does not match the system and grid");
  const bool has_control = control.size() > 0;
  if (has_control) {
    require(control.rows() == sys.m() && control.cols() == N + 1,
            ErrorKind::kShape, "control must be m x (n_steps + 1)");
  }
  if (state_forcing != nullptr) {
    require(state_forcing->rows() == n && state_forcing->cols() == N + 1,
            ErrorKind::kShape, "state forcing must be n x (n_steps + 1)");
  }

  Trajectory traj;
  traj.grid = grid_;
  traj.first_node = -D;
  traj.values.resize(n, N + D + 1);
  traj.values.leftCols(D + 1) = history.values();

  const auto& kt = simd::active_table();
  Vec rhs(n);
  Vec weights(N + 1);
  for (int k = 0; k < N; ++k) {
    rhs = traj.at(k);
    Vec drive = sys.A1 * traj.at(k - D);
    if (!lags_.is_zero()) {
      // Q_{k+1} = sum_j c_j M(t_{k+1-j}) y_j, c_0 = dt/2, c_j = dt.
      if (lags_.is_scalar()) {
        for (int j = 0; j <= k; ++j) {
          weights(j) = (j == 0 ? 0.5 * dt : dt) * lags_.scalar(k + 1 - j);
        }
        const simd::ColMajorView view{traj.data_at(0), static_cast<std::size_t>(n),
                                      static_cast<std::size_t>(k + 1),
                                      static_cast<std::size_t>(n)};
        kt.gemv(1.0, view, weights.data(), drive.data());
      } else {
        for (int j = 0; j <= k; ++j) {
          lags_.accumulate(k + 1 - j, j == 0 ? 0.5 * dt : dt, traj.data_at(j),
                           drive.data());
        }
      }
    }
    if (has_control) {
      sys.B.apply(k + 1, control.col(k + 1).data(), 1.0, drive.data());
    }
    if (state_forcing != nullptr) drive += state_forcing->col(k + 1);
    rhs += dt * drive;
    traj.at(k + 1) = lu_.solve(rhs);
  }
  if (!traj.values.allFinite()) {
    fail(ErrorKind::kNumerical, "forward run produced non-finite values");
  }
  return traj;
}

Trajectory simulate_forward(const DelaySystem& sys, const NodeSignal& control,
                            const TimeGrid& grid) {
  ForwardSolver solver(sys, grid);
  return solver.run(sys.history, control);
}

FundamentalSolution fundamental_solution(const DelaySystem& sys,
                                         const TimeGrid& grid) {
  DelaySystem free = sys;
  free.M = MemoryKernel::zero(sys.n());
  free.Mtilde = MemoryKernel::zero(sys.n());
  free.history = HistoryFunction::zero(sys.n(), grid);
  const ForwardSolver solver(free, grid);

  const int n = sys.n();
  const int N = grid.n_steps;
  FundamentalSolution fs;
  fs.grid = grid;
  fs.samples.assign(N + 1, Mat::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    const auto phi = HistoryFunction::pulse(Vec::Unit(n, i), grid);
    const Trajectory col = solver.run(phi, NodeSignal());
    for (int k = 0; k <= N; ++k) fs.samples[k].col(i) = col.at(k);
  }
  for (const Mat& s : fs.samples) {
    const double norm = Eigen::JacobiSVD<Mat>(s).singularValues()(0);
    fs.bound = std::max(fs.bound, norm);
  }
  return fs;
}

double mild_solution_check(const DelaySystem& sys, const NodeSignal& control,
                           const TimeGrid& grid) {
  sys.validate(grid);
  require(sys.history.vanishes_before_zero(), ErrorKind::kPrecondition,
          "mild-solution representation requires phi = 0 on [-h, 0)");
  const Trajectory y = simulate_forward(sys, control, grid);
  const FundamentalSolution S = fundamental_solution(sys, grid);
  const int N = grid.n_steps;
  const double dt = grid.dt;

  Vec rep = S.at(N) * sys.history.at_node(0);
  const bool has_control = control.size() > 0;
  for (int k = 0; k <= N; ++k) {
    Vec forcing = convolve_memory(y, sys.M, k);
    if (has_control) sys.B.apply(k, control.col(k).data(), 1.0, forcing.data());
    rep += trapezoid_weight(k, 0, N, dt) * (S.at(N - k) * forcing);
  }
  return (rep - y.final_state()).cwiseAbs().maxCoeff();
}

}  // namespace dmc
