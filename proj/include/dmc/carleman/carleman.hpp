#pragma once

#include <functional>

#include "dmc/core/types.hpp"

namespace dmc {

/// g(t): 1/t on (0, delta/2), a cubic Hermite bridge on [delta/2, delta),
/// 1 on [delta, T/2], mirrored on (T/2, T). The bridge is strictly
/// decreasing only for delta <= 4/3, which is enforced.
double weight_g(double t, double delta, double T);

/// Space-time sampling on interior time nodes t_k = k dt (k = 0..nt) and
/// interior space nodes x_j = j dx (j = 1..nx, zero Dirichlet boundary).
/// values(k, j); history rows hold p on (-h, 0) at spacing dt, oldest first.
struct SpaceTimeField {
  double T = 1.0;
  Mat values;   // (nt + 1) x nx
  Mat history;  // delay_steps x nx, may be empty (zero extension)
  int nt() const { return static_cast<int>(values.rows()) - 1; }
  int nx() const { return static_cast<int>(values.cols()); }
  double dt() const { return T / nt(); }
};

struct WeightSpec {
  double delta = 0.2;
  double lambda = 1.0;
  double s = 1.0;
  double T = 1.0;
  double h = 0.1;
  /// psi(t, x); unset selects the default profile
  /// 1 - (0.25 / pi^2) dist(x, centre of the sweep window at t)^2.
  std::function<double(double, double)> psi;
  double sweep_width = 0.5;
  void validate() const;
};

double default_psi(double t, double x, double T, double width);

/// sup of psi over the grid used for evaluation.
double psi_sup(const WeightSpec& spec, int nt, int nx);

struct Weights {
  double phi = 0.0;
  double theta = 0.0;
};

Weights eval_weights(const WeightSpec& spec, double t, double x, double psi_max);

struct IHBreakdown {
  double laplacian = 0.0;          // (s theta)^{-1} |Lap p(t)|^2
  double delayed_laplacian = 0.0;  // (s theta)^{-1} |Lap p(t - h)|^2
  double time_derivative = 0.0;    // (s theta)^{-1} |p_t|^2
  double gradient = 0.0;           // lambda^2 s theta |grad p|^2
  double zeroth = 0.0;             // lambda^4 (s theta)^3 |p|^2
  double total() const {
    return laplacian + delayed_laplacian + time_derivative + gradient + zeroth;
  }
};

IHBreakdown functional_IH(const SpaceTimeField& p, const WeightSpec& spec);
/// lambda^{2s} int theta |q|^2 e^{-2 s phi}.
double functional_IO(const SpaceTimeField& q, const WeightSpec& spec);

}  // namespace dmc
