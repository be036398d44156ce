#include "dmc/carleman/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dmc/errors.hpp"

namespace dmc {

namespace {

constexpr double kPi = std::numbers::pi;

// Interior-node accessor with zero Dirichlet values outside 0..nx-1.
double at_or_zero(const Eigen::Ref<const Vec>& row, int j) {
  return (j < 0 || j >= row.size()) ? 0.0 : row(j);
}

}  // namespace

double weight_g(double t, double delta, double T) {
  require(T > 0.0 && delta > 0.0 && delta < 0.5 * T, ErrorKind::kDomain,
          "need 0 < delta < T/2");
  require(delta <= 4.0 / 3.0, ErrorKind::kDomain,
          "the cubic bridge is monotone only for delta <= 4/3");
  require(t > 0.0 && t < T, ErrorKind::kDomain, "g is defined on (0, T)");
  if (t > 0.5 * T) t = T - t;
  if (t < 0.5 * delta) return 1.0 / t;
  if (t >= delta) return 1.0;
  // Hermite cubic from (delta/2, 2/delta, slope -4/delta^2) to (delta, 1, 0).
  const double len = 0.5 * delta;
  const double s = (t - len) / len;
  const double p0 = 2.0 / delta;
  const double m0 = -4.0 / (delta * delta);
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  return h00 * p0 + h10 * len * m0 + h01 * 1.0;
}

void WeightSpec::validate() const {
  require(lambda >= 0.0 && s > 0.0, ErrorKind::kConfig,
          "need lambda >= 0 and s > 0");
  require(T > 0.0 && h > 0.0, ErrorKind::kConfig, "need T > 0 and h > 0");
  require(delta > 0.0 && delta < 0.5 * T && delta <= 4.0 / 3.0,
          ErrorKind::kConfig, "need 0 < delta < T/2 and delta <= 4/3");
}

double default_psi(double t, double x, double T, double width) {
  const double centre = (kPi - width) * t / T + 0.5 * width;
  const double d = x - centre;
  return 1.0 - 0.25 / (kPi * kPi) * d * d;
}

double psi_sup(const WeightSpec& spec, int nt, int nx) {
  const double dt = spec.T / nt;
  const double dx = kPi / (nx + 1);
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= nt; ++k) {
    for (int j = 1; j <= nx; ++j) {
      const double t = k * dt;
      const double x = j * dx;
      const double v = spec.psi ? spec.psi(t, x)
                                : default_psi(t, x, spec.T, spec.sweep_width);
      best = std::max(best, std::abs(v));
    }
  }
  return best;
}

Weights eval_weights(const WeightSpec& spec, double t, double x, double psi_max) {
  const double psi =
      spec.psi ? spec.psi(t, x) : default_psi(t, x, spec.T, spec.sweep_width);
  const double g = weight_g(t, spec.delta, spec.T);
  const double e = std::exp(spec.lambda * psi);
  return {g * (std::exp(spec.lambda * psi_max) - e), g * e};
}

IHBreakdown functional_IH(const SpaceTimeField& p, const WeightSpec& spec) {
  spec.validate();
  const int nx = p.nx();
  const int nt = p.nt();
  require(nx >= 3, ErrorKind::kGrid, "second differences need nx >= 3");
  require(nt >= 2, ErrorKind::kGrid, "time differences need nt >= 2");
  require(std::abs(p.T - spec.T) <= 1e-12 * spec.T, ErrorKind::kShape,
          "field horizon differs from the weight horizon");
  const double dt = p.dt();
  const double dx = kPi / (nx + 1);
  const double ratio = spec.h / dt;
  const int D = static_cast<int>(std::lround(ratio));
  require(std::abs(ratio - D) <= 1e-9 * std::max(1.0, ratio), ErrorKind::kGrid,
          "h must be a multiple of the field time step");
  require(p.history.size() == 0 ||
              (p.history.rows() == D && p.history.cols() == nx),
          ErrorKind::kShape, "history must be delay_steps x nx");
  const double psi_max = psi_sup(spec, nt, nx);

  auto row = [&](int k) -> Vec {
    if (k >= 0) return p.values.row(k).transpose();
    if (p.history.size() == 0) return Vec::Zero(nx);
    return p.history.row(k + D).transpose();
  };
  auto laplacian = [&](const Vec& r, int j) {
    return (at_or_zero(r, j - 1) - 2.0 * r(j) + at_or_zero(r, j + 1)) / (dx * dx);
  };

  IHBreakdown out;
  const double cell = dt * dx;
  const double lam2 = spec.lambda * spec.lambda;
  for (int k = 1; k < nt; ++k) {
    const double t = k * dt;
    const Vec cur = row(k);
    const Vec del = row(k - D);
    const Vec prev = row(k - 1);
    const Vec next = row(k + 1);
    for (int j = 0; j < nx; ++j) {
      const Weights w = eval_weights(spec, t, (j + 1) * dx, psi_max);
      const double st = spec.s * w.theta;
      const double damp = std::exp(-2.0 * spec.s * w.phi) * cell;
      const double lap = laplacian(cur, j);
      const double lap_d = laplacian(del, j);
      const double pt = (next(j) - prev(j)) / (2.0 * dt);
      const double grad = (at_or_zero(cur, j + 1) - at_or_zero(cur, j - 1)) / (2.0 * dx);
      out.laplacian += damp * lap * lap / st;
      out.delayed_laplacian += damp * lap_d * lap_d / st;
      out.time_derivative += damp * pt * pt / st;
      out.gradient += damp * lam2 * st * grad * grad;
      out.zeroth += damp * lam2 * lam2 * st * st * st * cur(j) * cur(j);
    }
  }
  return out;
}

double functional_IO(const SpaceTimeField& q, const WeightSpec& spec) {
  spec.validate();
  const int nx = q.nx();
  const int nt = q.nt();
  require(nx >= 1 && nt >= 2, ErrorKind::kGrid, "field grid too coarse");
  const double dt = q.dt();
  const double dx = kPi / (nx + 1);
  const double psi_max = psi_sup(spec, nt, nx);
  double sum = 0.0;
  for (int k = 1; k < nt; ++k) {
    for (int j = 0; j < nx; ++j) {
      const Weights w = eval_weights(spec, k * dt, (j + 1) * dx, psi_max);
      const double v = q.values(k, j);
      sum += w.theta * v * v * std::exp(-2.0 * spec.s * w.phi) * dt * dx;
    }
  }
  return std::pow(spec.lambda, 2.0 * spec.s) * sum;
}

}  // namespace dmc
