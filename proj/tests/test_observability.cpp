#include <doctest.h>

#include <cmath>

#include "dmc/adjoint/adjoint.hpp"
#include "dmc/core/quadrature.hpp"
#include "dmc/errors.hpp"
#include "dmc/forward/random_system.hpp"
#include "dmc/heat/heat.hpp"
#include "dmc/observability/observability.hpp"
#include "support.hpp"

using namespace dmc;

namespace {

double min_over_max_eig(const Mat& G) {
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  const double mx = std::max(es.eigenvalues().maxCoeff(), 1e-300);
  return es.eigenvalues().minCoeff() / mx;
}

int brute_kalman_rank(const Mat& A, const Mat& G, const Mat& Mt, const Mat& B) {
  const auto n = A.rows();
  Mat Ah(2 * n, 2 * n);
  Ah << A, G, Mt, Mat::Zero(n, n);
  Mat Bh(2 * n, B.cols());
  Bh << B, Mat::Zero(n, B.cols());
  Mat K(2 * n, 2 * n * B.cols());
  Mat P = Bh;
  for (int i = 0; i < 2 * n; ++i) {
    K.middleCols(i * B.cols(), B.cols()) = P;
    P = Ah * P;
  }
  Eigen::FullPivLU<Mat> lu(K);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

}  // namespace

TEST_CASE("scalar integrator: G = diag(T, 0) with the z_T direction harmless") {
  const auto g = TimeGrid::uniform(1.0, 100, 0.1);
  auto sys = dmc::test::scalar_system(0.0, 0.0, 1.0, 0.1, 1.0, g);
  const auto rep = observability_gramian(sys, g);
  CHECK(rep.gramian(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(rep.gramian(0, 1)) <= 1e-14);
  CHECK(std::abs(rep.gramian(1, 1)) <= 1e-14);
  CHECK(rep.verdict == Verdict::kObservable);
  REQUIRE(rep.null_vectors.cols() == 1);
  CHECK(std::abs(rep.null_vectors(0, 0)) <= 1e-12);
  CHECK(std::abs(std::abs(rep.null_vectors(1, 0)) - 1.0) <= 1e-12);
  CHECK(rep.k_finite());
}

TEST_CASE("no control gives a zero Gramian and an unobservable verdict") {
  const auto g = TimeGrid::uniform(1.0, 50, 0.2);
  RandomSystemOptions opts;
  opts.h = 0.2;
  auto sys = random_system(2, 1, 3, g, opts);
  sys.B = ControlMap::constant(Mat::Zero(2, 1));
  const auto rep = observability_gramian(sys, g);
  CHECK(rep.gramian.isZero(0.0));
  CHECK(rep.verdict == Verdict::kUnobservableDirection);
  CHECK(rep.null_vectors.cols() == 4);
  CHECK(rep.offending.norm() == doctest::Approx(1.0));
  CHECK_FALSE(rep.k_finite());
  CHECK(unique_continuation_probe(sys, g, 16, 1).worst_ratio == 0.0);
}

TEST_CASE("Gramian is symmetric PSD and eigenvalues are sorted") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = TimeGrid::uniform(1.0, 80, 0.25);
    const auto sys = random_system(3, 2, seed, g);
    const auto rep = observability_gramian(sys, g);
    const double scale = rep.gramian.norm();
    CHECK((rep.gramian - rep.gramian.transpose()).norm() <= 1e-10 * scale);
    CHECK(min_over_max_eig(rep.gramian) >= -1e-10);
    for (Eigen::Index i = 1; i < rep.eigenvalues.size(); ++i) {
      CHECK(rep.eigenvalues(i) <= rep.eigenvalues(i - 1));
    }
  }
}

TEST_CASE("Gramian matches direct pairings of observation records") {
  const auto g = TimeGrid::uniform(1.0, 80, 0.25);
  const auto sys = random_system(3, 2, 4, g);
  const auto rep = observability_gramian(sys, g);
  CounterRng rng(5);
  for (int i = 0; i < 10; ++i) {
    const Vec v = rng.unit_vector(6);
    const Vec w = rng.unit_vector(6);
    const auto av = simulate_adjoint(sys, v.head(3), v.tail(3), g);
    const auto aw = simulate_adjoint(sys, w.head(3), w.tail(3), g);
    const double direct = observation_pairing(av.observation, aw.observation, g.dt);
    const double assembled = v.dot(rep.gramian * w);
    CHECK(std::abs(direct - assembled) <= 1e-8 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("nested control maps give a PSD Gramian difference") {
  for (std::uint64_t seed = 11; seed <= 15; ++seed) {
    const auto g = TimeGrid::uniform(1.0, 80, 0.25);
    const auto big = random_system(3, 2, seed, g);
    auto small = big;
    small.B = big.B.select_columns({0});
    const auto G2 = observability_gramian(big, g).gramian;
    const auto G1 = observability_gramian(small, g).gramian;
    Eigen::SelfAdjointEigenSolver<Mat> es(G2 - G1);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * G2.norm());
  }
}

TEST_CASE("constant K bounds the observability ratio on random probes") {
  const auto g = TimeGrid::uniform(1.0, 80, 0.25);
  auto sys = random_system(2, 2, 21, g);
  const auto rep = observability_gramian(sys, g);
  REQUIRE(rep.k_finite());
  const int N = g.n_steps;
  const int D = g.delay_steps;
  CounterRng rng(22);
  for (int p = 0; p < 100; ++p) {
    const Vec v = rng.unit_vector(4);
    const auto adj = simulate_adjoint(sys, v.head(2), v.tail(2), g);
    const double obs = observation_pairing(adj.observation, adj.observation, g.dt);
    for (std::size_t i = 0; i < rep.thetas.size(); ++i) {
      for (std::size_t j = 0; j < rep.t1s.size(); ++j) {
        const int a = g.index_of(rep.thetas[i]);
        const int b = g.index_of(rep.t1s[j]);
        double lhs = adj.traj.at(a).squaredNorm();
        for (int k = -D; k <= a; ++k) {
          lhs += trapezoid_weight(k, -D, a, g.dt) * adj.traj.at(k + D).squaredNorm();
        }
        for (int k = b - D; k <= N - D; ++k) {
          lhs += trapezoid_weight(k, b - D, N - D, g.dt) * adj.traj.at(k + D).squaredNorm();
        }
        const double K = rep.k_per_pair(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        CHECK(lhs <= K * obs * (1.0 + 1e-6) + 1e-14);
        CHECK(K <= rep.constant_K);
      }
    }
  }
}

TEST_CASE("extended Kalman rank worked examples") {
  SUBCASE("n = 1 rotation pair is controllable") {
    const Mat one = Mat::Ones(1, 1);
    const auto r = kalman_rank_extended(Mat::Zero(1, 1), one, one, one);
    CHECK(r.rank == 2);
    CHECK(r.controllable());
    CHECK(r.rank == brute_kalman_rank(Mat::Zero(1, 1), one, one, one));
  }
  SUBCASE("no control has rank zero") {
    CounterRng rng(1);
    const Mat A = rng.uniform_mat(3, 3, -1, 1);
    const Mat G = rng.uniform_mat(3, 3, -1, 1);
    const Mat Mt = rng.uniform_mat(3, 3, -1, 1);
    const Mat B = Mat::Zero(3, 2);
    const auto r = kalman_rank_extended(A, G, Mt, B);
    CHECK(r.rank == 0);
    CHECK_FALSE(r.controllable());
    CHECK(r.rank == brute_kalman_rank(A, G, Mt, B));
  }
  SUBCASE("zero memory block leaves the z block unreachable") {
    Mat A(2, 2);
    A << 0, 1, -2, -3;
    Mat B(2, 1);
    B << 0, 1;
    const Mat G = Mat::Identity(2, 2);
    const Mat Mt = Mat::Zero(2, 2);
    const auto r = kalman_rank_extended(A, G, Mt, B);
    CHECK(r.rank == 2);
    CHECK(r.dimension == 4);
    CHECK_FALSE(r.controllable());
    CHECK(r.rank == brute_kalman_rank(A, G, Mt, B));
  }
  SUBCASE("random instances agree with the brute-force rank") {
    CounterRng rng(7);
    for (int i = 0; i < 20; ++i) {
      const Mat A = rng.uniform_mat(3, 3, -1, 1);
      const Mat G = rng.uniform_mat(3, 3, -1, 1);
      Mat Mt = rng.uniform_mat(3, 3, -1, 1);
      if (i % 3 == 0) Mt.col(0).setZero();
      const Mat B = rng.uniform_mat(3, 1, -1, 1);
      CHECK(kalman_rank_extended(A, G, Mt, B).rank == brute_kalman_rank(A, G, Mt, B));
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(kalman_rank_extended(Mat::Zero(2, 2), Mat::Zero(3, 3), Mat::Zero(2, 2),
                                         Mat::Zero(2, 1)),
                    Error);
  }
}

TEST_CASE("unique continuation probe") {
  SUBCASE("full observation keeps a positive floor") {
    const auto g = TimeGrid::uniform(1.0, 80, 0.25);
    RandomSystemOptions opts;
    opts.with_delay = false;
    auto sys = random_system(3, 3, 2, g, opts);
    sys.Mtilde = MemoryKernel::zero(3);
    sys.B = ControlMap::constant(Mat::Identity(3, 3));
    CHECK(unique_continuation_probe(sys, g, 64, 3).worst_ratio > 0.0);
  }
  SUBCASE("spectral heat truncation with the mode-coupling control map") {
    const auto g = TimeGrid::uniform(1.0, 200, 0.1);
    Vec phi0 = Vec::Zero(5);
    phi0(0) = 1.0;
    const auto sys = spectral_heat_system(5, -1.0, {1.0}, 0.1, 1.0, phi0, g);
    const auto probe = unique_continuation_probe(sys, g, 64, 4);
    CHECK(probe.worst_ratio > 0.0);
    CHECK(probe.direction.size() == 10);
  }
}

TEST_CASE("threaded basis solves match the serial ones") {
  const auto g = TimeGrid::uniform(1.0, 80, 0.25);
  const auto sys = random_system(3, 2, 31, g);
  const auto serial = basis_adjoint_solves(sys, g, 1);
  const auto threaded = basis_adjoint_solves(sys, g, 3);
  REQUIRE(serial.size() == threaded.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].traj.values == threaded[i].traj.values);
  }
}
