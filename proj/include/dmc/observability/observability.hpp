#pragma once

#include <cstdint>
#include <vector>

#include "dmc/adjoint/adjoint.hpp"
#include "dmc/core/time_grid.hpp"
#include "dmc/core/types.hpp"
#include "dmc/forward/delay_system.hpp"

namespace dmc {

struct ObservabilityOptions {
  int theta_samples = 5;
  int t1_samples = 5;
  double null_threshold = 1e-10;  // relative to the largest eigenvalue
  double zero_tolerance = 1e-8;   // for the unique-continuation verdict
  int threads = 1;
};

enum class Verdict { kObservable, kUnobservableDirection };

/// Gramian over terminal data v = (w_T, z_T) in R^{2n}, spectrum, numerical
/// kernel and the observability-constant estimate.
struct ObservabilityReport {
  Mat gramian;
  Vec eigenvalues;   // non-increasing
  Mat eigenvectors;  // columns match eigenvalues
  Mat null_vectors;  // 2n x k
  Verdict verdict = Verdict::kObservable;
  Vec offending;     // set when the verdict is UnobservableDirection
  std::vector<double> thetas;
  std::vector<double> t1s;
  Mat k_per_pair;      // thetas x t1s, +inf where unbounded
  double constant_K = 0.0;  // +inf when unobservable
  bool k_finite() const;
};

/// Observation records B^T w for the 2n basis terminal data, m x (N+1) each.
std::vector<AdjointData> basis_adjoint_solves(const DelaySystem& sys,
                                              const TimeGrid& grid,
                                              int threads = 1);

/// Trapezoid pairing of two observation records.
double observation_pairing(const NodeSignal& a, const NodeSignal& b, double dt);

ObservabilityReport observability_gramian(const DelaySystem& sys,
                                          const TimeGrid& grid,
                                          const ObservabilityOptions& opts = {});

struct KalmanRank {
  int rank = 0;
  int dimension = 0;
  bool controllable() const { return rank == dimension; }
};

/// Rank of [B^, A^ B^, ..., A^{2n-1} B^] for A^ = [[A, G], [Mt, 0]] and
/// B^ = [B; 0].
KalmanRank kalman_rank_extended(const Mat& A, const Mat& G, const Mat& Mtilde,
                                const Mat& B);

struct ProbeResult {
  double worst_ratio = 0.0;
  Vec direction;  // (w_T, z_T) attaining the minimum
};

/// Minimum over random unit (w_T, z_T) of
/// ||B^T w||^2_{L2} / (||w_T||^2 + (int ||Mt(t)^T z_T|| dt)^2).
ProbeResult unique_continuation_probe(const DelaySystem& sys,
                                      const TimeGrid& grid, int n_samples,
                                      std::uint64_t seed);

}  // namespace dmc
