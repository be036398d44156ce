#include "dmc/heat/heat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "dmc/core/csv.hpp"
#include "dmc/core/quadrature.hpp"
#include "dmc/errors.hpp"
#include "dmc/forward/forward.hpp"

namespace dmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEdgeSlack = 1e-12;

MemoryKernel heat_kernel(int dim, double rate, const std::vector<double>& c) {
  if (c.empty()) return MemoryKernel::zero(dim);
  return MemoryKernel::scalar_exp_poly(dim, rate, c);
}

double flow_velocity(const MovingRegion& r, double t, double x) {
  return r.c0 + r.c1 * x + r.c2 * t;
}

double flow_endpoint(const MovingRegion& r, double x0, double t, double T) {
  if (t <= 0.0) return x0;
  const double nominal = T / std::max(r.flow_steps, 1);
  const int steps = std::max(1, static_cast<int>(std::ceil(t / nominal - 1e-12)));
  const double s = t / steps;
  double x = x0;
  double tau = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = flow_velocity(r, tau, x);
    const double k2 = flow_velocity(r, tau + 0.5 * s, x + 0.5 * s * k1);
    const double k3 = flow_velocity(r, tau + 0.5 * s, x + 0.5 * s * k2);
    const double k4 = flow_velocity(r, tau + s, x + s * k3);
    x += s / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    tau += s;
  }
  return x;
}

Mat heat_masks(const HeatConfig& cfg, const TimeGrid& grid, const Vec& x) {
  Mat masks(cfg.nx, grid.n_steps + 1);
  for (int k = 0; k <= grid.n_steps; ++k) {
    masks.col(k) = region_mask(cfg.region, grid.time(k), cfg.T, x);
  }
  return masks;
}

}  // namespace

std::pair<double, double> MovingRegion::interval(double t, double T) const {
  double lo = left;
  double hi = right;
  switch (kind) {
    case Kind::kSweep: {
      lo = (kPi - width) * t / T;
      hi = lo + width;
      break;
    }
    case Kind::kFixed:
      break;
    case Kind::kFlow:
      lo = flow_endpoint(*this, left, t, T);
      hi = flow_endpoint(*this, right, t, T);
      break;
  }
  return {lo, hi};
}

void HeatConfig::validate() const {
  require(nx >= 3, ErrorKind::kConfig, "nx must be at least 3");
  require(nt >= 1, ErrorKind::kConfig, "nt must be positive");
  require(T > 0.0 && h > 0.0 && T > h, ErrorKind::kConfig,
          "need 0 < h < T");
  const double ratio = nt * h / T;
  require(std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio),
          ErrorKind::kConfig, "nt * h / T must be an integer");
  if (region.kind == MovingRegion::Kind::kSweep) {
    require(region.width > 0.0 && region.width <= kPi, ErrorKind::kConfig,
            "sweep width must lie in (0, pi]");
  } else {
    require(region.left <= region.right, ErrorKind::kConfig,
            "region interval must satisfy left <= right");
  }
  if (control == HeatControl::kSynthesized) synthesis.validate();
}

double heat_dx(int nx) { return kPi / (nx + 1); }

Vec heat_xgrid(int nx) {
  const double dx = heat_dx(nx);
  Vec x(nx);
  for (int j = 0; j < nx; ++j) x(j) = (j + 1) * dx;
  return x;
}

Mat dirichlet_laplacian(int nx) {
  require(nx >= 1, ErrorKind::kShape, "need at least one interior node");
  const double inv = 1.0 / (heat_dx(nx) * heat_dx(nx));
  Mat L = Mat::Zero(nx, nx);
  for (int j = 0; j < nx; ++j) {
    L(j, j) = -2.0 * inv;
    if (j > 0) L(j, j - 1) = inv;
    if (j + 1 < nx) L(j, j + 1) = inv;
  }
  return L;
}

Vec region_mask(const MovingRegion& region, double t, double T, const Vec& x) {
  const auto [lo, hi] = region.interval(t, T);
  require(lo >= -kEdgeSlack && hi <= kPi + kEdgeSlack, ErrorKind::kConfig,
          "control region leaves [0, pi]");
  Vec mask(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    // Closed interval; the slack keeps ties on the boundary inside.
    mask(j) = (x(j) >= lo - kEdgeSlack && x(j) <= hi + kEdgeSlack) ? 1.0 : 0.0;
  }
  return mask;
}

TimeGrid heat_grid(const HeatConfig& cfg) {
  cfg.validate();
  return TimeGrid::uniform(cfg.T, cfg.nt, cfg.h);
}

DelaySystem build_heat_system(const HeatConfig& cfg) {
  const TimeGrid grid = heat_grid(cfg);
  const Vec x = heat_xgrid(cfg.nx);
  DelaySystem sys;
  sys.A = dirichlet_laplacian(cfg.nx);
  sys.A1 = cfg.delay_operator == DelayOperator::kLaplacian
               ? sys.A
               : Mat::Identity(cfg.nx, cfg.nx);
  sys.M = heat_kernel(cfg.nx, cfg.kernel_rate, cfg.kernel_coeffs);
  sys.Mtilde = sys.M;
  sys.B = ControlMap::diagonal_mask(heat_masks(cfg, grid, x));
  sys.h = cfg.h;
  sys.T = cfg.T;
  const auto profile = cfg.profile ? cfg.profile
                                   : std::function<double(double)>(
                                         [](double s) { return std::sin(s); });
  Vec phi(cfg.nx);
  for (int j = 0; j < cfg.nx; ++j) phi(j) = profile(x(j));
  sys.history = HistoryFunction::constant(phi, grid);
  return sys;
}

NodeSignal explicit_heat_control(const HeatConfig& cfg) {
  const TimeGrid grid = heat_grid(cfg);
  const Vec x = heat_xgrid(cfg.nx);
  NodeSignal u(cfg.nx, grid.n_steps + 1);
  for (int k = 0; k <= grid.n_steps; ++k) {
    const double t = grid.time(k);
    for (int j = 0; j < cfg.nx; ++j) {
      u(j, k) = -t * std::exp(-kPi * kPi * t) * std::sin(kPi * x(j));
    }
  }
  return u;
}

ExperimentResult run_experiment(const HeatConfig& cfg) {
  const DelaySystem sys = build_heat_system(cfg);
  ExperimentResult res;
  res.grid = heat_grid(cfg);
  res.x = heat_xgrid(cfg.nx);
  const TimeGrid& g = res.grid;
  const int N = g.n_steps;
  const int D = g.delay_steps;
  const double w = std::sqrt(heat_dx(cfg.nx));

  SynthesisConfig scfg = cfg.synthesis;
  scfg.norm_weight = w;
  switch (cfg.control) {
    case HeatControl::kExplicit:
      res.control = explicit_heat_control(cfg);
      break;
    case HeatControl::kZero:
      res.control = NodeSignal::Zero(cfg.nx, N + 1);
      break;
    case HeatControl::kSynthesized:
      res.synthesis = synthesize_control(sys, g, scfg);
      res.control = res.synthesis->control;
      break;
  }
  res.trajectory = ForwardSolver(sys, g).run(sys.history, res.control);
  res.report = verify_terminal_conditions(res.trajectory, sys.Mtilde, sys.h,
                                          scfg.tol, scfg.theta_samples, w);
  for (int k = -D; k <= N; ++k) {
    res.l2_norms.push_back(w * res.trajectory.at(k).norm());
  }
  Vec mem = Vec::Zero(cfg.nx);
  for (int k = 0; k <= N - D; ++k) {
    mem += trapezoid_weight(k, 0, N - D, g.dt) *
           (sys.Mtilde.eval(g.time(N) - g.time(k)) * res.trajectory.at(k));
  }
  res.memory_residual = w * mem.norm();
  for (int k = N - D; k <= N; ++k) {
    res.window_sup = std::max(res.window_sup, w * res.trajectory.at(k).norm());
  }
  return res;
}

Trajectory extend_to_figure(const HeatConfig& cfg, const ExperimentResult& res) {
  const DelaySystem base = build_heat_system(cfg);
  const int N = res.grid.n_steps;
  const int D = res.grid.delay_steps;
  const TimeGrid grid = TimeGrid::uniform(cfg.T + cfg.h, N + D, cfg.h);
  DelaySystem sys = base;
  sys.T = cfg.T + cfg.h;
  Mat masks = Mat::Zero(cfg.nx, N + D + 1);
  masks.leftCols(N + 1) = heat_masks(cfg, res.grid, res.x);
  sys.B = ControlMap::diagonal_mask(std::move(masks));
  sys.history = HistoryFunction(base.history.values(), grid.dt);
  NodeSignal u = NodeSignal::Zero(cfg.nx, N + D + 1);
  u.leftCols(N + 1) = res.control;
  return ForwardSolver(sys, grid).run(sys.history, u);
}

void write_field_csv(const std::string& path, const Trajectory& traj,
                     const Vec& x) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::kConfig, "cannot write " + path);
  os << "t,x,y\n";
  for (int k = traj.first_node; k <= traj.last_node(); ++k) {
    const double t = traj.grid.time(k);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      write_number(os, t);
      os << ',';
      write_number(os, x(j));
      os << ',';
      write_number(os, traj.at(k)(j));
      os << '\n';
    }
  }
}

void write_norms_csv(const std::string& path, const ExperimentResult& res) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorKind::kConfig, "cannot write " + path);
  os << "t,l2_norm\n";
  const int D = res.grid.delay_steps;
  for (std::size_t i = 0; i < res.l2_norms.size(); ++i) {
    write_number(os, res.grid.time(static_cast<int>(i) - D));
    os << ',';
    write_number(os, res.l2_norms[i]);
    os << '\n';
  }
}

SpectralResult spectral_apply(const Vec& profile, double t, int n_modes) {
  const auto nx = static_cast<int>(profile.size());
  require(nx >= 1, ErrorKind::kShape, "empty profile");
  require(n_modes >= 1, ErrorKind::kPrecondition, "need at least one mode");
  SpectralResult out;
  out.truncated = n_modes > nx;
  out.modes_used = std::min(n_modes, nx);
  const Vec x = heat_xgrid(nx);
  const double dx = heat_dx(nx);
  const double c = std::sqrt(2.0 / kPi);
  out.profile = Vec::Zero(nx);
  for (int n = 1; n <= out.modes_used; ++n) {
    const Vec psi = c * (n * x.array()).sin().matrix();
    const double coeff = dx * psi.dot(profile);
    out.profile += std::exp(-static_cast<double>(n) * n * t) * coeff * psi;
  }
  return out;
}

Vec spectral_control_map(const std::vector<double>& u_coeffs, const Vec& x) {
  const double c = std::sqrt(2.0 / kPi);
  Vec out = Vec::Zero(x.size());
  for (std::size_t i = 0; i < u_coeffs.size(); ++i) {
    const int n = static_cast<int>(i) + 2;
    out += u_coeffs[i] * c * (n * x.array()).sin().matrix();
  }
  if (!u_coeffs.empty()) out += 2.0 * u_coeffs[0] * c * x.array().sin().matrix();
  return out;
}

DelaySystem spectral_heat_system(int n_modes, double kernel_rate,
                                 const std::vector<double>& kernel_coeffs,
                                 double h, double T, const Vec& history0,
                                 const TimeGrid& grid) {
  require(n_modes >= 2, ErrorKind::kPrecondition,
          "the control map needs at least two modes");
  require(history0.size() == n_modes, ErrorKind::kShape,
          "history must have one coefficient per mode");
  DelaySystem sys;
  sys.A = Mat::Zero(n_modes, n_modes);
  for (int i = 0; i < n_modes; ++i) sys.A(i, i) = -static_cast<double>((i + 1) * (i + 1));
  sys.A1 = sys.A;
  sys.M = heat_kernel(n_modes, kernel_rate, kernel_coeffs);
  sys.Mtilde = sys.M;
  // Column i carries u_{i+2}; u_2 also feeds psi_1 with weight 2.
  Mat B = Mat::Zero(n_modes, n_modes - 1);
  for (int i = 0; i < n_modes - 1; ++i) B(i + 1, i) = 1.0;
  B(0, 0) = 2.0;
  sys.B = ControlMap::constant(std::move(B));
  sys.h = h;
  sys.T = T;
  sys.history = HistoryFunction::pulse(history0, grid);
  sys.validate(grid);
  return sys;
}

}  // namespace dmc
