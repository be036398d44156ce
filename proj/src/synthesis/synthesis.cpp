#include "dmc/synthesis/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "dmc/core/quadrature.hpp"
#include "dmc/errors.hpp"
#include "dmc/simd/kernels.hpp"

namespace dmc {

namespace {

// Sum of the enforced residuals, used to rank iterates. A sum rather than a
// maximum keeps the ranking informative when one condition sits on a floor
// that no control can lower (condition (b) with a history that is nonzero
// before t = 0).
double worst_enforced(const TerminalReport& r, const ConditionSet& e) {
  double w = 0.0;
  if (e.a) w += r.res_a;
  if (e.b) w += r.res_b;
  if (e.c) w += r.res_c;
  return w;
}

bool enforced_satisfied(const TerminalReport& r, const ConditionSet& e) {
  return (!e.a || r.satisfied[0]) && (!e.b || r.satisfied[1]) &&
         (!e.c || r.satisfied[2]);
}

}  // namespace

void SynthesisConfig::validate() const {
  require(rho > 0.0, ErrorKind::kConfig, "penalty rho must be positive");
  require(growth > 1.0, ErrorKind::kConfig, "penalty growth must exceed 1");
  require(tol > 0.0, ErrorKind::kConfig, "tol must be positive");
  require(max_outer >= 1 && max_inner >= 1, ErrorKind::kConfig,
          "iteration limits must be positive");
  require(theta_samples >= 0, ErrorKind::kConfig,
          "theta_samples must be non-negative");
  require(inner_tol > 0.0 && norm_weight > 0.0, ErrorKind::kConfig,
          "inner_tol and norm_weight must be positive");
}

std::vector<int> theta_nodes(const TimeGrid& grid, int theta_samples) {
  const int D = grid.delay_steps;
  std::vector<int> out;
  if (theta_samples <= 0 || theta_samples > D + 1) {
    for (int k = -D; k <= 0; ++k) out.push_back(k);
    return out;
  }
  if (theta_samples == 1) return {0};
  for (int i = 0; i < theta_samples; ++i) {
    const double f = static_cast<double>(i) / (theta_samples - 1);
    const int k = -D + static_cast<int>(std::lround(f * D));
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

TerminalReport verify_terminal_conditions(const Trajectory& traj,
                                          const MemoryKernel& Mtilde, double h,
                                          double tol, int theta_samples,
                                          double norm_weight) {
  const TimeGrid& g = traj.grid;
  const int N = g.n_steps;
  const int D = g.delay_steps;
  const double dt = g.dt;
  require(g.horizon() > h * (1.0 + 1e-12), ErrorKind::kWindow,
          "terminal conditions need T > h");
  require(std::abs(g.delay() - h) <= 1e-9 * h, ErrorKind::kGrid,
          "trajectory grid does not match the delay");
  require(traj.has_node(0) && traj.has_node(N), ErrorKind::kPrecondition,
          "trajectory must cover [0, T]");
  require(Mtilde.dim() == traj.dim(), ErrorKind::kShape,
          "kernel and trajectory dimensions differ");

  TerminalReport r;
  r.res_a = norm_weight * traj.at(N).norm();
  for (int k = N - D + 1; k <= N; ++k) {
    r.res_c = std::max(r.res_c, norm_weight * traj.at(k).norm());
  }
  if (!Mtilde.is_zero()) {
    const double T = g.time(N);
    for (int a : theta_nodes(g, theta_samples)) {
      if (!traj.has_node(a)) continue;
      Vec acc = Vec::Zero(traj.dim());
      for (int k = a; k <= N - D; ++k) {
        const double wt = trapezoid_weight(k, a, N - D, dt);
        if (wt > 0.0) acc += wt * (Mtilde.eval(T - g.time(k)) * traj.at(k));
      }
      r.res_b = std::max(r.res_b, norm_weight * acc.norm());
    }
  }
  r.satisfied = {r.res_a <= tol, r.res_b <= tol, r.res_c <= tol};
  return r;
}

PenaltyProblem::PenaltyProblem(const DelaySystem& sys, const TimeGrid& grid,
                               const SynthesisConfig& cfg)
    : sys_(&sys),
      grid_(grid),
      cfg_(cfg),
      thetas_(theta_nodes(grid, cfg.theta_samples)),
      solver_(sys, grid),
      zero_history_(HistoryFunction::zero(sys.n(), grid)) {
  cfg.validate();
  const int N = grid.n_steps;
  const int D = grid.delay_steps;
  const double T = grid.time(N);
  mt_.resize(N + 1);
  for (int k = -D; k <= N - D; ++k) {
    mt_[k + D] = sys.Mtilde.eval(T - grid.time(k));
  }
}

Trajectory PenaltyProblem::state(const NodeSignal& u, bool with_history) const {
  return solver_.run(with_history ? sys_->history : zero_history_, u);
}

double PenaltyProblem::inner(const NodeSignal& a, const NodeSignal& b) const {
  // Node 0 does not enter the scheme, so it carries no weight.
  const int N = grid_.n_steps;
  return grid_.dt * (a.rightCols(N).array() * b.rightCols(N).array()).sum();
}

// Penalty P(y) = w^2/2 [ |y_N|^2 + sum_theta |r_theta|^2 + sum_window dt |y_k|^2 ]
// and, when grad is given, dP/dy_m for m = 0..N (n x (N+1)).
double PenaltyProblem::penalty(const Trajectory& y, NodeSignal* grad) const {
  const int n = sys_->n();
  const int N = grid_.n_steps;
  const int D = grid_.delay_steps;
  const double dt = grid_.dt;
  const double w2 = cfg_.norm_weight * cfg_.norm_weight;
  if (grad != nullptr) grad->setZero(n, N + 1);

  double p = 0.0;
  if (cfg_.enforce.a) {
    p += 0.5 * w2 * y.at(N).squaredNorm();
    if (grad != nullptr) grad->col(N) += w2 * y.at(N);
  }
  if (b_active()) {
    Vec r_sum = Vec::Zero(n);
    // Shared tail sum over (0, N - D]; every theta adds its own head.
    Vec tail = Vec::Zero(n);
    for (int k = 1; k <= N - D; ++k) {
      const double wt = k == N - D ? 0.5 * dt : dt;
      tail += wt * (mt_[k + D] * y.at(k));
    }
    for (int a : thetas_) {
      Vec r = tail;
      for (int k = a; k <= 0; ++k) {
        r += trapezoid_weight(k, a, N - D, dt) * (mt_[k + D] * y.at(k));
      }
      p += 0.5 * w2 * r.squaredNorm();
      r_sum += r;
    }
    if (grad != nullptr) {
      for (int k = 1; k <= N - D; ++k) {
        const double wt = k == N - D ? 0.5 * dt : dt;
        grad->col(k) += w2 * wt * (mt_[k + D].transpose() * r_sum);
      }
    }
  }
  if (cfg_.enforce.c) {
    for (int k = N - D + 1; k <= N; ++k) {
      p += 0.5 * w2 * dt * y.at(k).squaredNorm();
      if (grad != nullptr) grad->col(k) += w2 * dt * y.at(k);
    }
  }
  return p;
}

bool PenaltyProblem::b_active() const {
  return cfg_.enforce.b && !sys_->Mtilde.is_zero();
}

int PenaltyProblem::reduced_size() const {
  const int n = sys_->n();
  return (cfg_.enforce.a ? n : 0) + (b_active() ? n : 0) +
         (cfg_.enforce.c ? n * grid_.delay_steps : 0);
}

// Every theta window shares the same dependence on y_1..y_{N-D}, so the
// condition (b) block collapses to sqrt(#theta) times the mean window
// integral; the spread around the mean does not depend on u.
Vec PenaltyProblem::reduced_residual(const Trajectory& y) const {
  const int n = sys_->n();
  const int N = grid_.n_steps;
  const int D = grid_.delay_steps;
  const double dt = grid_.dt;
  const double w = cfg_.norm_weight;
  Vec r(reduced_size());
  int at = 0;
  if (cfg_.enforce.a) {
    r.segment(at, n) = w * y.at(N);
    at += n;
  }
  if (b_active()) {
    Vec tail = Vec::Zero(n);
    for (int k = 1; k <= N - D; ++k) {
      tail += (k == N - D ? 0.5 * dt : dt) * (mt_[k + D] * y.at(k));
    }
    Vec mean = Vec::Zero(n);
    for (int a : thetas_) {
      mean += tail;
      for (int k = a; k <= 0; ++k) {
        mean += trapezoid_weight(k, a, N - D, dt) * (mt_[k + D] * y.at(k));
      }
    }
    const double count = static_cast<double>(thetas_.size());
    r.segment(at, n) = w * mean / std::sqrt(count);
    at += n;
  }
  if (cfg_.enforce.c) {
    for (int k = N - D + 1; k <= N; ++k) {
      r.segment(at, n) = w * std::sqrt(dt) * y.at(k);
      at += n;
    }
  }
  return r;
}

NodeSignal PenaltyProblem::reduced_adjoint(const Vec& mu) const {
  const int n = sys_->n();
  const int N = grid_.n_steps;
  const int D = grid_.delay_steps;
  const double dt = grid_.dt;
  const double w = cfg_.norm_weight;
  NodeSignal g = NodeSignal::Zero(n, N + 1);
  int at = 0;
  if (cfg_.enforce.a) {
    g.col(N) += w * mu.segment(at, n);
    at += n;
  }
  if (b_active()) {
    const double root = std::sqrt(static_cast<double>(thetas_.size()));
    const Vec mb = mu.segment(at, n);
    for (int k = 1; k <= N - D; ++k) {
      const double wt = k == N - D ? 0.5 * dt : dt;
      g.col(k) += w * root * wt * (mt_[k + D].transpose() * mb);
    }
    at += n;
  }
  if (cfg_.enforce.c) {
    for (int k = N - D + 1; k <= N; ++k) {
      g.col(k) += w * std::sqrt(dt) * mu.segment(at, n);
      at += n;
    }
  }
  return adjoint_sweep(g);
}

double PenaltyProblem::cost(const NodeSignal& u, double rho) const {
  const Trajectory y = state(u);
  return 0.5 * inner(u, u) + rho * penalty(y, nullptr);
}

NodeSignal PenaltyProblem::adjoint_sweep(const NodeSignal& g) const {
  const DelaySystem& sys = *sys_;
  const int n = sys.n();
  const int N = grid_.n_steps;
  const int D = grid_.delay_steps;
  const double dt = grid_.dt;
  // Transpose of the forward recursion:
  //   lambda_m = E^{-T} (rho g_m + lambda_{m+1} + dt A1^T lambda_{m+1+D}
  //                      + dt^2 sum_{s>m} M_{s-m}^T lambda_s).
  Mat lam = Mat::Zero(n, N + 2);
  const Mat A1t = sys.A1.transpose();
  const LagTable& lags = solver_.lags();
  const auto& kt = simd::active_table();
  Vec weights(N + 1);
  Vec rhs(n);
  for (int m = N; m >= 1; --m) {
    rhs = g.col(m) + lam.col(m + 1);
    if (m + 1 + D <= N) rhs += dt * (A1t * lam.col(m + 1 + D));
    if (!lags.is_zero() && m < N) {
      if (lags.is_scalar()) {
        const int count = N - m;
        for (int s = m + 1; s <= N; ++s) {
          weights(s - m - 1) = dt * dt * lags.scalar(s - m);
        }
        const simd::ColMajorView view{lam.col(m + 1).data(),
                                      static_cast<std::size_t>(n),
                                      static_cast<std::size_t>(count),
                                      static_cast<std::size_t>(n)};
        kt.gemv(1.0, view, weights.data(), rhs.data());
      } else {
        for (int s = m + 1; s <= N; ++s) {
          lags.accumulate(s - m, dt * dt, lam.col(s).data(), rhs.data(),
                          /*transpose=*/true);
        }
      }
    }
    solver_.solve_transposed(rhs.data());
    lam.col(m) = rhs;
  }

  NodeSignal out = NodeSignal::Zero(sys.m(), N + 1);
  for (int m = 1; m <= N; ++m) {
    sys.B.apply_transpose(m, lam.col(m).data(), 1.0, out.col(m).data());
  }
  return out;
}

double PenaltyProblem::cost_and_gradient(const NodeSignal& u, double rho,
                                         NodeSignal& grad,
                                         bool with_history) const {
  const Trajectory y = state(u, with_history);
  NodeSignal g;
  const double cost = 0.5 * inner(u, u) + rho * penalty(y, &g);

  grad = u + adjoint_sweep(rho * g);
  grad.col(0).setZero();
  if (!std::isfinite(cost) || !grad.allFinite()) {
    fail(ErrorKind::kNumerical, "non-finite cost or gradient");
  }
  return cost;
}

namespace {

IterateRecord make_record(int outer, int inner, double rho, double cost,
                          double grad_norm, const TerminalReport& r) {
  return IterateRecord{outer, inner, rho, cost, grad_norm, r.res_a, r.res_b,
                       r.res_c};
}

}  // namespace

SynthesisResult synthesize_control(const DelaySystem& sys, const TimeGrid& grid,
                                   const SynthesisConfig& cfg) {
  cfg.validate();
  const PenaltyProblem prob(sys, grid, cfg);
  const int N = grid.n_steps;
  auto report_for = [&](const Trajectory& y) {
    return verify_terminal_conditions(y, sys.Mtilde, sys.h, cfg.tol,
                                      cfg.theta_samples, cfg.norm_weight);
  };

  SynthesisResult res;
  res.control = NodeSignal::Zero(sys.m(), N + 1);
  res.trajectory = prob.state(res.control);
  res.report = report_for(res.trajectory);
  if (enforced_satisfied(res.report, cfg.enforce)) {
    res.converged = true;
    return res;
  }

  NodeSignal u = res.control;
  double best = worst_enforced(res.report, cfg.enforce);
  double rho = cfg.rho;
  NodeSignal grad;
  NodeSignal hp;
  SynthesisMethod method = cfg.method;
  if (method == SynthesisMethod::kAuto) {
    method = prob.reduced_size() <= kDirectLimit
                 ? SynthesisMethod::kDirect
                 : SynthesisMethod::kConjugateGradient;
  }
  // Direct method: u = L^* mu with (I / rho + L L^*) mu = -c, where c is the
  // reduced residual of the uncontrolled run and L the reduced residual map.
  Mat gram;
  Vec c_free;
  if (method == SynthesisMethod::kDirect) {
    const int dim = prob.reduced_size();
    gram.resize(dim, dim);
    for (int i = 0; i < dim; ++i) {
      const NodeSignal v = prob.reduced_adjoint(Vec::Unit(dim, i));
      gram.col(i) = prob.reduced_residual(prob.state(v, /*with_history=*/false));
    }
    gram = 0.5 * (gram + gram.transpose());
    c_free = prob.reduced_residual(res.trajectory);
  }

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    if (method == SynthesisMethod::kDirect) {
      const int dim = prob.reduced_size();
      Mat K = gram;
      K.diagonal().array() += 1.0 / rho;
      Eigen::LDLT<Mat> ldlt(K);
      if (ldlt.info() != Eigen::Success) {
        fail(ErrorKind::kNumerical, "penalty normal equations failed to factor");
      }
      const Vec mu = ldlt.solve(-c_free);
      u = dim > 0 ? prob.reduced_adjoint(mu) : NodeSignal::Zero(sys.m(), N + 1);
      ++res.total_inner;
      const Trajectory y = prob.state(u);
      const TerminalReport rep = report_for(y);
      res.log.push_back(make_record(outer, 1, rho, prob.cost(u, rho), 0.0, rep));
      const double worst = worst_enforced(rep, cfg.enforce);
      if (worst <= best) {
        best = worst;
        res.control = u;
        res.trajectory = y;
        res.report = rep;
      }
      if (enforced_satisfied(rep, cfg.enforce)) {
        res.converged = true;
        break;
      }
      rho *= cfg.growth;
      continue;
    }
    double cost = prob.cost_and_gradient(u, rho, grad);
    NodeSignal zero = NodeSignal::Zero(sys.m(), N + 1);
    NodeSignal g0;
    prob.cost_and_gradient(zero, rho, g0);
    const double ref = std::sqrt(prob.inner(g0, g0));
    const double stop = cfg.inner_tol * std::max(ref, 1e-300);

    if (method == SynthesisMethod::kConjugateGradient) {
      // H u = b with H v = v + rho L^* L v, the gradient of the homogeneous
      // problem; r = -grad J(u).
      NodeSignal r = -grad;
      NodeSignal p = r;
      double rr = prob.inner(r, r);
      for (int it = 0; it < cfg.max_inner && std::sqrt(rr) > stop; ++it) {
        prob.cost_and_gradient(p, rho, hp, /*with_history=*/false);
        const double php = prob.inner(p, hp);
        if (!(php > 0.0)) break;
        const double alpha = rr / php;
        u += alpha * p;
        r -= alpha * hp;
        const double rr_next = prob.inner(r, r);
        p = r + (rr_next / rr) * p;
        rr = rr_next;
        ++res.total_inner;
        const Trajectory y = prob.state(u);
        cost = prob.cost(u, rho);
        res.log.push_back(make_record(outer, it + 1, rho, cost, std::sqrt(rr),
                                      report_for(y)));
      }
    } else {
      double gg = prob.inner(grad, grad);
      for (int it = 0; it < cfg.max_inner && std::sqrt(gg) > stop; ++it) {
        double step = 1.0;
        NodeSignal trial;
        double trial_cost = 0.0;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
          trial = u - step * grad;
          trial_cost = prob.cost(trial, rho);
          if (!std::isfinite(trial_cost)) {
            fail(ErrorKind::kNumerical, "non-finite cost in line search");
          }
          if (trial_cost <= cost - 1e-4 * step * gg) {
            accepted = true;
            break;
          }
          step *= 0.5;
        }
        if (!accepted) break;
        u = trial;
        cost = prob.cost_and_gradient(u, rho, grad);
        gg = prob.inner(grad, grad);
        ++res.total_inner;
        res.log.push_back(make_record(outer, it + 1, rho, cost, std::sqrt(gg),
                                      report_for(prob.state(u))));
      }
    }

    const Trajectory y = prob.state(u);
    const TerminalReport rep = report_for(y);
    const double worst = worst_enforced(rep, cfg.enforce);
    if (worst <= best) {
      best = worst;
      res.control = u;
      res.trajectory = y;
      res.report = rep;
    }
    if (enforced_satisfied(rep, cfg.enforce)) {
      res.converged = true;
      break;
    }
    rho *= cfg.growth;
  }
  return res;
}

double gradient_check(const DelaySystem& sys, const TimeGrid& grid,
                      const SynthesisConfig& cfg, const NodeSignal& u0,
                      int n_directions, std::uint64_t seed, double eps) {
  const PenaltyProblem prob(sys, grid, cfg);
  const int N = grid.n_steps;
  require(u0.rows() == sys.m() && u0.cols() == N + 1, ErrorKind::kShape,
          "u0 must be m x (n_steps + 1)");
  NodeSignal grad;
  prob.cost_and_gradient(u0, cfg.rho, grad);
  CounterRng rng(seed);
  double worst = 0.0;
  for (int d = 0; d < n_directions; ++d) {
    NodeSignal dir = NodeSignal::Zero(sys.m(), N + 1);
    for (int k = 1; k <= N; ++k) {
      for (int i = 0; i < sys.m(); ++i) dir(i, k) = rng.normal();
    }
    const double fd = (prob.cost(u0 + eps * dir, cfg.rho) -
                       prob.cost(u0 - eps * dir, cfg.rho)) /
                      (2.0 * eps);
    const double ad = prob.inner(grad, dir);
    const double scale =
        std::max({std::abs(fd), std::abs(ad), std::numeric_limits<double>::min()});
    worst = std::max(worst, std::abs(fd - ad) / scale);
  }
  return worst;
}

}  // namespace dmc
