#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dmc/core/memory_kernel.hpp"
#include "dmc/core/time_grid.hpp"
#include "dmc/core/trajectory.hpp"
#include "dmc/core/types.hpp"
#include "dmc/forward/delay_system.hpp"
#include "dmc/synthesis/synthesis.hpp"

namespace dmc {

/// Moving control support omega(t) inside [0, pi].
struct MovingRegion {
  enum class Kind { kSweep, kFlow, kFixed };
  Kind kind = Kind::kSweep;
  double width = 0.5;         // Sweep: omega(t) = [delta(t), delta(t) + width]
  double left = 0.0;          // Fixed interval, or the seed set omega_0 (Flow)
  double right = 0.5;
  // Flow velocity f(t, x) = c0 + c1 x + c2 t.
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  int flow_steps = 1000;  // RK4 steps over [0, T]

  /// Interval [lo, hi] at time t for horizon T.
  std::pair<double, double> interval(double t, double T) const;
};

enum class DelayOperator { kIdentity, kLaplacian };
enum class HeatControl { kExplicit, kSynthesized, kZero };

struct HeatConfig {
  int nx = 50;
  int nt = 200;
  double T = 1.0;
  double h = 0.1;
  // Scalar kernel M(t) = Mt(t) = e^{rate t} sum_k coeffs[k] t^k acting on
  // every node; empty coeffs give no memory.
  double kernel_rate = -1.0;
  std::vector<double> kernel_coeffs{1.0};
  DelayOperator delay_operator = DelayOperator::kIdentity;
  MovingRegion region;
  HeatControl control = HeatControl::kExplicit;
  std::function<double(double)> profile;  // history phi(x); unset = sin(x)
  SynthesisConfig synthesis;              // used for kSynthesized
  void validate() const;
};

double heat_dx(int nx);
Vec heat_xgrid(int nx);
/// (1/dx^2) tridiag(1, -2, 1) on the interior nodes, Dirichlet boundary.
Mat dirichlet_laplacian(int nx);

Vec region_mask(const MovingRegion& region, double t, double T, const Vec& x);

TimeGrid heat_grid(const HeatConfig& cfg);
DelaySystem build_heat_system(const HeatConfig& cfg);
/// u(t, x) = -t e^{-pi^2 t} sin(pi x) on every interior node; B masks it.
NodeSignal explicit_heat_control(const HeatConfig& cfg);

struct ExperimentResult {
  TimeGrid grid;
  Vec x;
  NodeSignal control;
  Trajectory trajectory;
  TerminalReport report;
  std::vector<double> l2_norms;  // ||y(t_k)||_{L2}, k = -D..N
  double memory_residual = 0.0;  // ||int_0^{T-h} Mt(T-s) y(s) ds||_{L2}
  double window_sup = 0.0;       // max over [T-h, T] of ||y||_{L2}
  std::optional<SynthesisResult> synthesis;
};

ExperimentResult run_experiment(const HeatConfig& cfg);

/// Continues the run to T + h with zero control (the plotted surface).
Trajectory extend_to_figure(const HeatConfig& cfg, const ExperimentResult& res);

void write_field_csv(const std::string& path, const Trajectory& traj,
                     const Vec& x);
void write_norms_csv(const std::string& path, const ExperimentResult& res);

struct SpectralResult {
  Vec profile;
  bool truncated = false;  // n_modes exceeded the grid and was clamped
  int modes_used = 0;
};

/// Heat semigroup oracle: damp mode n of psi_n = sqrt(2/pi) sin(n x) by
/// e^{-n^2 t}, using the discrete inner product on the interior grid.
SpectralResult spectral_apply(const Vec& profile, double t, int n_modes);

/// Grid samples of 2 u_2 psi_1 + sum_{n>=2} u_n psi_n, coefficients from n=2.
Vec spectral_control_map(const std::vector<double>& u_coeffs, const Vec& x);

/// Modal truncation: A = diag(-n^2), A1 = A, B the n x (n-1) matrix of the
/// map above, kernel applied mode-wise, history a pulse phi(0) = history0.
DelaySystem spectral_heat_system(int n_modes, double kernel_rate,
                                 const std::vector<double>& kernel_coeffs,
                                 double h, double T, const Vec& history0,
                                 const TimeGrid& grid);

}  // namespace dmc
