#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dmc/core/memory_kernel.hpp"
#include "dmc/core/time_grid.hpp"
#include "dmc/core/trajectory.hpp"
#include "dmc/core/types.hpp"
#include "dmc/forward/delay_system.hpp"
#include "dmc/forward/forward.hpp"

namespace dmc {

/// kDirect assembles the normal equations in the (small) space of penalty
/// residuals and factors them; kAuto picks it when that space is at most
/// kDirectLimit-dimensional and falls back to CG otherwise.
enum class SynthesisMethod { kAuto, kDirect, kConjugateGradient, kGradientDescent };

inline constexpr int kDirectLimit = 3000;

/// Which terminal conditions enter the penalty: (a) y(T) = 0, (b) the memory
/// integrals vanish, (c) y = 0 on (T - h, T].
struct ConditionSet {
  bool a = true;
  bool b = true;
  bool c = true;
};

struct SynthesisConfig {
  double rho = 10.0;
  double growth = 10.0;
  double tol = 1e-3;
  int max_outer = 8;
  int max_inner = 200;
  int theta_samples = 0;  // 0 selects delay_steps + 1 (every node)
  std::uint64_t seed = 0;
  SynthesisMethod method = SynthesisMethod::kAuto;
  ConditionSet enforce;
  double inner_tol = 1e-10;  // relative CG residual / gradient norm
  double norm_weight = 1.0;  // scales every state norm in the report
  void validate() const;
};

struct TerminalReport {
  double res_a = 0.0;
  double res_b = 0.0;
  double res_c = 0.0;
  std::array<bool, 3> satisfied{true, true, true};
  bool all() const { return satisfied[0] && satisfied[1] && satisfied[2]; }
};

/// Theta nodes (indices in [-D, 0]) used for condition (b).
std::vector<int> theta_nodes(const TimeGrid& grid, int theta_samples);

TerminalReport verify_terminal_conditions(const Trajectory& traj,
                                          const MemoryKernel& Mtilde, double h,
                                          double tol, int theta_samples,
                                          double norm_weight = 1.0);

struct IterateRecord {
  int outer = 0;
  int inner = 0;
  double rho = 0.0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double res_a = 0.0;
  double res_b = 0.0;
  double res_c = 0.0;
};

struct SynthesisResult {
  NodeSignal control;  // m x (N+1); node 0 does not enter the scheme
  Trajectory trajectory;
  TerminalReport report;
  std::vector<IterateRecord> log;
  int total_inner = 0;
  bool converged = false;
};

/// Penalized cost J_rho with its exact discrete gradient. The gradient is
/// expressed in the dt-weighted inner product on control nodes 1..N.
class PenaltyProblem {
 public:
  PenaltyProblem(const DelaySystem& sys, const TimeGrid& grid,
                 const SynthesisConfig& cfg);

  const TimeGrid& grid() const { return grid_; }
  int m() const { return sys_->m(); }

  Trajectory state(const NodeSignal& u, bool with_history = true) const;
  double cost(const NodeSignal& u, double rho) const;
  /// Returns the cost and writes the gradient into grad.
  double cost_and_gradient(const NodeSignal& u, double rho, NodeSignal& grad,
                           bool with_history = true) const;
  double inner(const NodeSignal& a, const NodeSignal& b) const;

  /// Penalty residuals stacked so that the penalty equals half their squared
  /// norm up to a u-independent constant; size reduced_size().
  int reduced_size() const;
  Vec reduced_residual(const Trajectory& y) const;
  /// Adjoint of u -> reduced_residual(state(u, false)) in the dt-weighted
  /// inner product.
  NodeSignal reduced_adjoint(const Vec& mu) const;

 private:
  double penalty(const Trajectory& y, NodeSignal* grad) const;
  // Transposed forward recursion driven by dP/dy; returns B^T lambda.
  NodeSignal adjoint_sweep(const NodeSignal& g) const;
  bool b_active() const;

  const DelaySystem* sys_;
  TimeGrid grid_;
  SynthesisConfig cfg_;
  std::vector<int> thetas_;
  std::vector<Mat> mt_;  // Mtilde(T - t_k) for k in [-D, N - D]
  ForwardSolver solver_;
  HistoryFunction zero_history_;
};

SynthesisResult synthesize_control(const DelaySystem& sys, const TimeGrid& grid,
                                   const SynthesisConfig& cfg);

/// Max relative discrepancy between the gradient and central differences of
/// J_rho along random directions.
double gradient_check(const DelaySystem& sys, const TimeGrid& grid,
                      const SynthesisConfig& cfg, const NodeSignal& u0,
                      int n_directions, std::uint64_t seed, double eps = 1e-5);

}  // namespace dmc
