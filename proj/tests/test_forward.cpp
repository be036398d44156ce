#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "dmc/errors.hpp"
#include "dmc/forward/forward.hpp"
#include "dmc/forward/random_system.hpp"
#include "support.hpp"

using namespace dmc;
using dmc::test::scalar_system;

TEST_CASE("scalar decay matches e^{-t}") {
  const auto g = TimeGrid::uniform(1.0, 200, 0.1);
  const auto sys = scalar_system(-1.0, 0.0, 1.0, 0.1, 1.0, g);
  const auto y = simulate_forward(sys, NodeSignal(), g);
  CHECK(std::abs(y.final_state()(0) - std::exp(-1.0)) <= 5e-3);
  CHECK(y.first_node == -g.delay_steps);
  CHECK(y.at(-g.delay_steps)(0) == 1.0);
}

TEST_CASE("implicit Euler is first order on the decay oracle") {
  auto err = [](int n) {
    const auto g = TimeGrid::uniform(1.0, n, 0.1);
    const auto sys = scalar_system(-1.0, 0.0, 1.0, 0.1, 1.0, g);
    return std::abs(simulate_forward(sys, NodeSignal(), g).final_state()(0) - std::exp(-1.0));
  };
  const double ratio = err(200) / err(400);
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.3);
}

TEST_CASE("method of steps: y' = y(t - 1) with unit history") {
  const auto g = TimeGrid::uniform(2.0, 2000, 1.0);
  const auto sys = scalar_system(0.0, 1.0, 1.0, 1.0, 2.0, g);
  const auto y = simulate_forward(sys, NodeSignal(), g);
  CHECK(std::abs(y.at(1000)(0) - 2.0) <= 1e-6);
  CHECK(std::abs(y.at(500)(0) - 1.5) <= 1e-6);
}

TEST_CASE("zero data gives the zero trajectory") {
  const auto g = TimeGrid::uniform(1.0, 50, 0.2);
  RandomSystemOptions opts;
  opts.h = 0.2;
  auto sys = random_system(3, 2, 4, g, opts);
  sys.history = HistoryFunction::zero(3, g);
  const auto y = simulate_forward(sys, NodeSignal::Zero(2, 51), g);
  CHECK(y.values.isZero(0.0));
}

TEST_CASE("forward scheme is linear in history and control") {
  const auto g = TimeGrid::uniform(1.0, 100, 0.25);
  const auto s1 = random_system(3, 2, 1, g);
  auto s2 = random_system(3, 2, 2, g);
  s2.A = s1.A;
  s2.A1 = s1.A1;
  s2.M = s1.M;
  s2.B = s1.B;
  const auto u1 = random_control(2, 1, g);
  const auto u2 = random_control(2, 2, g);
  const ForwardSolver solver(s1, g);
  const double a = 1.7, b = -0.6;
  const HistoryFunction mix(a * s1.history.values() + b * s2.history.values(), g.dt);
  const auto y = solver.run(mix, a * u1 + b * u2);
  const Mat expect = a * solver.run(s1.history, u1).values + b * solver.run(s2.history, u2).values;
  CHECK(dmc::test::rel_diff(y.values, expect) <= 1e-10);
}

TEST_CASE("shape and step errors") {
  const auto g = TimeGrid::uniform(1.0, 10, 0.1);
  auto sys = scalar_system(0.0, 0.0, 1.0, 0.1, 1.0, g);
  CHECK_THROWS_AS(simulate_forward(sys, NodeSignal::Zero(2, 11), g), Error);
  sys.A = dmc::test::scalar(1.0 / g.dt);
  try {
    simulate_forward(sys, NodeSignal(), g);
    FAIL("singular step matrix was accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kStepFailure);
  }
}

TEST_CASE("fundamental solution") {
  SUBCASE("S(0) = I and agreement with the matrix exponential when A1 = 0") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto g = TimeGrid::uniform(1.0, 1000, 0.25);
      RandomSystemOptions opts;
      opts.with_delay = false;
      const auto sys = random_system(4, 2, seed, g, opts);
      const auto fs = fundamental_solution(sys, g);
      CHECK(fs.at(0).isApprox(Mat::Identity(4, 4), 0.0));
      double worst = 0.0;
      for (int k = 0; k <= g.n_steps; k += 50) {
        const Mat ex = (sys.A * g.time(k)).exp();
        worst = std::max(worst, (fs.at(k) - ex).cwiseAbs().maxCoeff());
      }
      CHECK(worst <= 5e-3);
      CHECK(std::isfinite(fs.bound));
    }
  }
  SUBCASE("scalar delay oracle S(t) = 1 + (t - 1)_+") {
    const auto g = TimeGrid::uniform(2.0, 2000, 1.0);
    const auto sys = scalar_system(0.0, 1.0, 1.0, 1.0, 2.0, g);
    const auto fs = fundamental_solution(sys, g);
    double worst = 0.0;
    for (int k = 0; k <= g.n_steps; ++k) {
      const double t = g.time(k);
      worst = std::max(worst, std::abs(fs.at(k)(0, 0) - (1.0 + std::max(0.0, t - 1.0))));
    }
    CHECK(worst <= 1e-3);
  }
  SUBCASE("bound is non-decreasing in the horizon") {
    double prev = 0.0;
    for (double T : {0.5, 1.0, 1.5, 2.0}) {
      const auto g = TimeGrid::uniform(T, static_cast<int>(T * 200), 0.25);
      RandomSystemOptions opts;
      opts.T = T;
      const auto sys = random_system(3, 1, 8, g, opts);
      const double b = fundamental_solution(sys, g).bound;
      CHECK(b >= prev - 1e-12);
      prev = b;
    }
  }
}

TEST_CASE("mild-solution cross-check") {
  SUBCASE("zero data") {
    const auto g = TimeGrid::uniform(1.0, 100, 0.1);
    auto sys = scalar_system(-1.0, 0.5, 1.0, 0.1, 1.0, g);
    sys.history = HistoryFunction::zero(1, g);
    CHECK(mild_solution_check(sys, NodeSignal(), g) == doctest::Approx(0.0));
  }
  SUBCASE("nonzero history before zero is rejected") {
    const auto g = TimeGrid::uniform(1.0, 100, 0.1);
    const auto sys = scalar_system(-1.0, 0.5, 1.0, 0.1, 1.0, g);
    try {
      mild_solution_check(sys, NodeSignal(), g);
      FAIL("precondition not enforced");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kPrecondition);
    }
  }
  SUBCASE("Duhamel oracle when A1 = 0 and M = 0") {
    const auto g = TimeGrid::uniform(1.0, 200, 0.1);
    RandomSystemOptions opts;
    opts.with_delay = false;
    opts.with_memory = false;
    opts.history_pulse = true;
    opts.scale = 0.5;
    opts.h = 0.1;
    const auto sys = random_system(3, 2, 6, g, opts);
    CHECK(mild_solution_check(sys, random_control(2, 6, g), g) <= 1e-2);
  }
  SUBCASE("first-order convergence on a scalar system with memory and delay") {
    auto residual = [](int n) {
      const auto g = TimeGrid::uniform(1.0, n, 0.25);
      RandomSystemOptions opts;
      opts.history_pulse = true;
      const auto sys = random_system(1, 1, 12, g, opts);
      return mild_solution_check(sys, random_control(1, 12, g), g);
    };
    const double ratio = residual(200) / residual(400);
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
  }
}
