#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dmc/core/csv.hpp"
#include "dmc/core/history.hpp"
#include "dmc/core/memory_kernel.hpp"
#include "dmc/core/quadrature.hpp"
#include "dmc/core/time_grid.hpp"
#include "dmc/core/trajectory.hpp"
#include "dmc/errors.hpp"

using namespace dmc;

namespace {

bool throws_kind(ErrorKind kind, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

Trajectory scalar_traj(const TimeGrid& g, const std::function<double(double)>& f) {
  Trajectory y;
  y.grid = g;
  y.first_node = 0;
  y.values.resize(1, g.n_steps + 1);
  for (int k = 0; k <= g.n_steps; ++k) y.values(0, k) = f(g.time(k));
  return y;
}

}  // namespace

TEST_CASE("time grid aligns the delay with the step") {
  const auto g = TimeGrid::uniform(1.0, 200, 0.1);
  CHECK(g.dt == doctest::Approx(0.005));
  CHECK(g.delay_steps == 20);
  CHECK(g.delay() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.index_of(0.5) == 100);
  CHECK(throws_kind(ErrorKind::kGrid, [] { TimeGrid::uniform(1.0, 10, 0.15); }));
  CHECK(throws_kind(ErrorKind::kGrid, [] { TimeGrid::uniform(1.0, 0, 0.1); }));
  CHECK(throws_kind(ErrorKind::kGrid, [&] { g.index_of(0.0012); }));
  const auto r = g.refined(2);
  CHECK(r.n_steps == 400);
  CHECK(r.delay_steps == 40);
}

TEST_CASE("kernel evaluation") {
  Mat G(2, 2);
  G << 1, 2, 3, 4;
  const auto c = MemoryKernel::constant(G);
  CHECK(c.eval(0.0) == G);
  CHECK(c.eval(7.5) == G);

  const auto e = MemoryKernel::scalar_exp_poly(1, -1.0, {1.0});
  CHECK(e.eval(0.0)(0, 0) == doctest::Approx(1.0));
  CHECK(e.eval(std::log(2.0))(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(MemoryKernel::zero(3).eval(2.0).isZero());
  CHECK(throws_kind(ErrorKind::kDomain, [&] { e.eval(-0.1); }));

  const auto s = MemoryKernel::sampled(0.5, {Mat::Constant(1, 1, 0.0), Mat::Constant(1, 1, 1.0),
                                             Mat::Constant(1, 1, 4.0)});
  CHECK(s.eval(0.25)(0, 0) == doctest::Approx(0.5));
  CHECK(s.eval(0.75)(0, 0) == doctest::Approx(2.5));
  CHECK(s.max_time() == doctest::Approx(1.0));
  CHECK(throws_kind(ErrorKind::kRange, [&] { s.eval(1.5); }));
}

TEST_CASE("exp-poly kernel matches the direct formula at random times") {
  CounterRng rng(3);
  const Mat a0 = rng.uniform_mat(3, 3, -1, 1);
  const Mat a1 = rng.uniform_mat(3, 3, -1, 1);
  const Mat a2 = rng.uniform_mat(3, 3, -1, 1);
  const auto k = MemoryKernel::exp_poly(-0.7, {a0, a1, a2});
  for (int i = 0; i < 100; ++i) {
    const double t = rng.uniform(0.0, 3.0);
    const Mat direct = std::exp(-0.7 * t) * (a0 + t * a1 + t * t * a2);
    CHECK((k.eval(t) - direct).norm() <= 1e-12 * direct.norm());
  }
}

TEST_CASE("kernel construction rejects mismatched coefficients") {
  CHECK(throws_kind(ErrorKind::kShape,
                    [] { MemoryKernel::exp_poly(-1.0, {Mat::Identity(2, 2), Mat::Identity(3, 3)}); }));
  CHECK(throws_kind(ErrorKind::kShape, [] { MemoryKernel::constant(Mat::Zero(2, 3)); }));
}

TEST_CASE("history sampling and interpolation") {
  const auto g = TimeGrid::uniform(1.0, 10, 0.2);
  const auto phi = HistoryFunction::from_function(
      1, g, [](double th) { return Vec::Constant(1, 1.0 + th); });
  CHECK(phi.delay_steps() == 2);
  CHECK(phi.eval(-0.2)(0) == doctest::Approx(0.8));
  CHECK(phi.eval(-0.05)(0) == doctest::Approx(0.95));
  CHECK(throws_kind(ErrorKind::kDomain, [&] { phi.eval(0.1); }));
  CHECK(throws_kind(ErrorKind::kDomain, [&] { phi.eval(-0.3); }));
  CHECK(HistoryFunction::pulse(Vec::Ones(2), g).vanishes_before_zero());
  CHECK_FALSE(phi.vanishes_before_zero());
}

TEST_CASE("memory convolution oracles") {
  const auto g = TimeGrid::uniform(1.0, 100, 0.1);
  SUBCASE("zero integrand") {
    const auto y = scalar_traj(g, [](double) { return 0.0; });
    const auto k = MemoryKernel::scalar_exp_poly(1, -1.0, {1.0});
    for (int i : {0, 10, 100}) CHECK(convolve_memory(y, k, i)(0) == 0.0);
  }
  SUBCASE("linear integrand with constant kernel is exact") {
    const auto y = scalar_traj(g, [](double s) { return s; });
    CHECK(convolve_memory(y, MemoryKernel::constant(Mat::Ones(1, 1)), 100)(0) ==
          doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("constant integrand against e^{-t}") {
    const double c = 2.5;
    const auto y = scalar_traj(g, [&](double) { return c; });
    const double exact = c * (1.0 - std::exp(-1.0));
    const double got = convolve_memory(y, MemoryKernel::scalar_exp_poly(1, -1.0, {1.0}), 100)(0);
    CHECK(std::abs(got - exact) <= 2.0 * g.dt * g.dt * c);
  }
  SUBCASE("shape mismatch") {
    const auto y = scalar_traj(g, [](double) { return 1.0; });
    CHECK(throws_kind(ErrorKind::kShape,
                      [&] { convolve_memory(y, MemoryKernel::zero(2), 10); }));
  }
}

TEST_CASE("memory convolution converges at second order") {
  auto f = [](double s) { return std::sin(3.0 * s) + s * s; };
  const auto k = MemoryKernel::scalar_exp_poly(1, -2.0, {1.0, 0.5});
  auto value = [&](int n) {
    const auto g = TimeGrid::uniform(1.0, n, 0.0);
    return convolve_memory(scalar_traj(g, f), k, n)(0);
  };
  const double oracle = value(6400);
  const double e1 = std::abs(value(40) - oracle);
  const double e2 = std::abs(value(80) - oracle);
  const double ratio = e1 / e2;
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("trapezoid weights") {
  CHECK(trapezoid_weight(0, 0, 4, 0.1) == doctest::Approx(0.05));
  CHECK(trapezoid_weight(2, 0, 4, 0.1) == doctest::Approx(0.1));
  CHECK(trapezoid_weight(4, 0, 4, 0.1) == doctest::Approx(0.05));
  CHECK(trapezoid_weight(3, 3, 3, 0.1) == 0.0);
}

TEST_CASE("counter generator is reproducible and order independent") {
  CounterRng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CounterRng c(42);
  CHECK(c.next_u64() == CounterRng::mix(42 + 0x9E3779B97F4A7C15ULL));
  CounterRng u(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(CounterRng(9).unit_vector(5).norm() == doctest::Approx(1.0));
}

TEST_CASE("trajectory csv layout") {
  const auto g = TimeGrid::uniform(1.0, 2, 0.5);
  Trajectory y;
  y.grid = g;
  y.first_node = -1;
  y.values = Mat::Zero(2, 4);
  y.values(0, 3) = 1.5;
  std::ostringstream os;
  y.write_csv(os);
  const std::string text = os.str();
  CHECK(text.rfind("t,y_1,y_2\n", 0) == 0);
  CHECK(text.find("-0.5,0,0\n") != std::string::npos);
  CHECK(text.find("1,1.5,0\n") != std::string::npos);
  CHECK(y.final_state()(0) == 1.5);
}

TEST_CASE("numbers round-trip through csv text") {
  std::ostringstream os;
  write_number(os, 0.1 + 0.2);
  CHECK(std::stod(os.str()) == 0.1 + 0.2);
}
