#include "dmc/observability/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "dmc/core/quadrature.hpp"
#include "dmc/errors.hpp"

namespace dmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec basis_datum(int n, int i) { return Vec::Unit(2 * n, i); }

// Grid-aligned samples spread evenly over [lo, hi] (node indices).
std::vector<int> node_samples(int lo, int hi, int count) {
  std::vector<int> out;
  if (count <= 1 || lo == hi) {
    out.push_back(hi);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    const int k = lo + static_cast<int>(std::lround(f * (hi - lo)));
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

// Quadratic form of the left side of the observability inequality at
// (theta, T1) in the basis of terminal data.
Mat window_form(const std::vector<AdjointData>& basis, int a, int b,
                const TimeGrid& g) {
  const int dim = static_cast<int>(basis.size());
  const int N = g.n_steps;
  const int D = g.delay_steps;
  const double dt = g.dt;
  const int n = basis.front().traj.dim();
  // Stack every contributing sample with its quadrature weight, then form
  // the Gram matrix once.
  std::vector<std::pair<int, double>> rows;  // (node, weight)
  rows.emplace_back(a, 1.0);
  for (int k = -D; k <= a; ++k) {
    const double wt = trapezoid_weight(k, -D, a, dt);
    if (wt > 0.0) rows.emplace_back(k + D, wt);
  }
  for (int k = b - D; k <= N - D; ++k) {
    const double wt = trapezoid_weight(k, b - D, N - D, dt);
    if (wt > 0.0) rows.emplace_back(k + D, wt);
  }
  Mat S(static_cast<Eigen::Index>(rows.size()) * n, dim);
  for (int j = 0; j < dim; ++j) {
    const Trajectory& w = basis[j].traj;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto [node, wt] = rows[r];
      S.block(static_cast<Eigen::Index>(r) * n, j, n, 1) =
          std::sqrt(wt) * w.at(node);
    }
  }
  return S.transpose() * S;
}

}  // namespace

bool ObservabilityReport::k_finite() const { return std::isfinite(constant_K); }

double observation_pairing(const NodeSignal& a, const NodeSignal& b, double dt) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::kShape,
          "observation records differ in shape");
  const int last = static_cast<int>(a.cols()) - 1;
  double sum = 0.0;
  for (int k = 0; k <= last; ++k) {
    sum += trapezoid_weight(k, 0, last, dt) * a.col(k).dot(b.col(k));
  }
  return sum;
}

std::vector<AdjointData> basis_adjoint_solves(const DelaySystem& sys,
                                              const TimeGrid& grid,
                                              int threads) {
  const AdjointSolver solver(sys, grid);
  const int n = sys.n();
  const int dim = 2 * n;
  std::vector<AdjointData> out(dim);
  auto work = [&](int i) {
    const Vec v = basis_datum(n, i);
    out[i] = solver.run(v.head(n), v.tail(n));
  };
  const int workers = std::clamp(threads, 1, dim);
  if (workers == 1) {
    for (int i = 0; i < dim; ++i) work(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < dim; i += workers) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

ObservabilityReport observability_gramian(const DelaySystem& sys,
                                          const TimeGrid& grid,
                                          const ObservabilityOptions& opts) {
  require(grid.n_steps > 0 && grid.dt > 0.0, ErrorKind::kPrecondition,
          "observability needs a non-empty grid");
  const int n = sys.n();
  const int dim = 2 * n;
  const int N = grid.n_steps;
  const int D = grid.delay_steps;
  const auto basis = basis_adjoint_solves(sys, grid, opts.threads);

  ObservabilityReport rep;
  rep.gramian.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const double g = observation_pairing(basis[i].observation,
                                           basis[j].observation, grid.dt);
      rep.gramian(i, j) = g;
      rep.gramian(j, i) = g;
    }
  }

  Eigen::SelfAdjointEigenSolver<Mat> eig(rep.gramian);
  if (eig.info() != Eigen::Success) {
    fail(ErrorKind::kNumerical, "Gramian eigen-decomposition failed");
  }
  // Eigen returns ascending order; reverse to non-increasing.
  rep.eigenvalues = eig.eigenvalues().reverse();
  rep.eigenvectors = eig.eigenvectors().rowwise().reverse();
  const double top = std::max(rep.eigenvalues(0), 0.0);
  const double cut = opts.null_threshold * top;
  int rank = 0;
  while (rank < dim && rep.eigenvalues(rank) > cut) ++rank;
  rep.null_vectors = rep.eigenvectors.rightCols(dim - rank);

  // Unique-continuation verdict on each numerical null direction.
  double mt_scale = 1.0;
  for (int k = 0; k <= N; ++k) {
    mt_scale = std::max(mt_scale, sys.Mtilde.eval(grid.time(k)).norm());
  }
  for (int c = 0; c < rep.null_vectors.cols(); ++c) {
    const Vec v = rep.null_vectors.col(c);
    bool trivial = v.head(n).norm() <= opts.zero_tolerance;
    for (int k = 0; trivial && k <= N; ++k) {
      const double r =
          (sys.Mtilde.eval(grid.time(k)).transpose() * v.tail(n)).norm();
      trivial = r <= opts.zero_tolerance * mt_scale;
    }
    if (!trivial) {
      rep.verdict = Verdict::kUnobservableDirection;
      rep.offending = v;
      break;
    }
  }

  // Observability constant per (theta, T1) pair.
  const bool extended = basis.front().traj.has_node(-D);
  const auto theta_nodes =
      extended ? node_samples(-D, 0, opts.theta_samples) : node_samples(0, 0, 1);
  const auto t1_nodes = node_samples(N - D, N, opts.t1_samples);
  for (int a : theta_nodes) rep.thetas.push_back(grid.time(a));
  for (int b : t1_nodes) rep.t1s.push_back(grid.time(b));
  rep.k_per_pair.resize(static_cast<Eigen::Index>(theta_nodes.size()),
                        static_cast<Eigen::Index>(t1_nodes.size()));

  const Mat U = rep.eigenvectors.leftCols(rank);
  const Vec inv_sqrt = rep.eigenvalues.head(rank).cwiseSqrt().cwiseInverse();
  const Mat Z = rep.null_vectors;
  rep.constant_K = 0.0;
  for (std::size_t i = 0; i < theta_nodes.size(); ++i) {
    for (std::size_t j = 0; j < t1_nodes.size(); ++j) {
      const Mat P = window_form(basis, theta_nodes[i], t1_nodes[j], grid);
      double k_val = 0.0;
      const double scale = std::max(P.trace(), std::numeric_limits<double>::min());
      if (Z.cols() > 0 && (Z.transpose() * P * Z).trace() > 1e-8 * scale) {
        k_val = kInf;
      } else if (rank > 0) {
        const Mat R = inv_sqrt.asDiagonal() * (U.transpose() * P * U) *
                      inv_sqrt.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Mat> re(0.5 * (R + R.transpose()),
                                              Eigen::EigenvaluesOnly);
        k_val = std::max(re.eigenvalues().maxCoeff(), 0.0);
      }
      rep.k_per_pair(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          k_val;
      rep.constant_K = std::max(rep.constant_K, k_val);
    }
  }
  if (rep.verdict == Verdict::kUnobservableDirection) rep.constant_K = kInf;
  return rep;
}

KalmanRank kalman_rank_extended(const Mat& A, const Mat& G, const Mat& Mtilde,
                                const Mat& B) {
  const auto n = A.rows();
  require(A.cols() == n && G.rows() == n && G.cols() == n &&
              Mtilde.rows() == n && Mtilde.cols() == n && B.rows() == n,
          ErrorKind::kShape, "extended Kalman blocks have inconsistent shapes");
  const auto m = B.cols();
  Mat Ah = Mat::Zero(2 * n, 2 * n);
  Ah.topLeftCorner(n, n) = A;
  Ah.topRightCorner(n, n) = G;
  Ah.bottomLeftCorner(n, n) = Mtilde;
  Mat Bh = Mat::Zero(2 * n, m);
  Bh.topRows(n) = B;

  Mat K(2 * n, 2 * n * m);
  Mat block = Bh;
  for (Eigen::Index p = 0; p < 2 * n; ++p) {
    K.middleCols(p * m, m) = block;
    block = Ah * block;
  }
  KalmanRank out;
  out.dimension = static_cast<int>(2 * n);
  if (m == 0 || K.cwiseAbs().maxCoeff() == 0.0) return out;
  Eigen::ColPivHouseholderQR<Mat> qr(K);
  qr.setThreshold(1e-10);
  out.rank = static_cast<int>(qr.rank());
  return out;
}

ProbeResult unique_continuation_probe(const DelaySystem& sys,
                                      const TimeGrid& grid, int n_samples,
                                      std::uint64_t seed) {
  require(n_samples > 0, ErrorKind::kPrecondition, "need at least one sample");
  const int n = sys.n();
  const int N = grid.n_steps;
  const auto basis = basis_adjoint_solves(sys, grid);
  const int dim = 2 * n;
  Mat G(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      G(i, j) = G(j, i) = observation_pairing(basis[i].observation,
                                              basis[j].observation, grid.dt);
    }
  }
  std::vector<Mat> mt(N + 1);
  for (int k = 0; k <= N; ++k) mt[k] = sys.Mtilde.eval(grid.time(k)).transpose();

  CounterRng rng(seed);
  ProbeResult out;
  out.worst_ratio = kInf;
  for (int s = 0; s < n_samples; ++s) {
    const Vec v = rng.unit_vector(dim);
    const double num = v.dot(G * v);
    double mem = 0.0;
    for (int k = 0; k <= N; ++k) {
      mem += trapezoid_weight(k, 0, N, grid.dt) * (mt[k] * v.tail(n)).norm();
    }
    const double den = v.head(n).squaredNorm() + mem * mem;
    const double ratio = den > 0.0 ? std::max(num, 0.0) / den : kInf;
    if (ratio < out.worst_ratio) {
      out.worst_ratio = ratio;
      out.direction = v;
    }
  }
  return out;
}

}  // namespace dmc
