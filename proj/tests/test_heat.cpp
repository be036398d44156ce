#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "dmc/core/quadrature.hpp"
#include "dmc/errors.hpp"
#include "dmc/forward/forward.hpp"
#include "dmc/heat/heat.hpp"

using namespace dmc;

namespace {

constexpr double kPi = std::numbers::pi;

Vec psi(int n, const Vec& x) {
  return std::sqrt(2.0 / kPi) * (n * x.array()).sin().matrix();
}

HeatConfig pure_heat(int nx, int nt) {
  HeatConfig cfg;
  cfg.nx = nx;
  cfg.nt = nt;
  cfg.kernel_coeffs.clear();
  cfg.control = HeatControl::kZero;
  return cfg;
}

// Pure heat flow: no memory, no delay, no control.
Trajectory pure_heat_run(const HeatConfig& cfg) {
  DelaySystem sys = build_heat_system(cfg);
  sys.A1.setZero();
  const auto g = heat_grid(cfg);
  return simulate_forward(sys, NodeSignal(), g);
}

}  // namespace

TEST_CASE("three-point Dirichlet stencil") {
  const Mat L = dirichlet_laplacian(3);
  const double dx = kPi / 4.0;
  CHECK(heat_dx(3) == doctest::Approx(dx));
  Mat expect(3, 3);
  expect << -2, 1, 0, 1, -2, 1, 0, 1, -2;
  expect /= dx * dx;
  CHECK((L - expect).norm() <= 1e-14);
  CHECK(heat_xgrid(3)(0) == doctest::Approx(dx));
}

TEST_CASE("discrete Laplacian spectrum") {
  const Mat L = dirichlet_laplacian(50);
  CHECK((L - L.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(L);
  const Vec ev = es.eigenvalues().reverse();  // least negative first
  CHECK(ev.maxCoeff() < 0.0);
  for (int n = 1; n <= 5; ++n) {
    const double target = -static_cast<double>(n * n);
    CHECK(std::abs(ev(n - 1) - target) <= 0.02 * std::abs(target));
  }
}

TEST_CASE("delay operator choice") {
  HeatConfig cfg;
  cfg.nx = 5;
  cfg.nt = 20;
  CHECK(build_heat_system(cfg).A1.isIdentity(0.0));
  cfg.delay_operator = DelayOperator::kLaplacian;
  const auto sys = build_heat_system(cfg);
  CHECK(sys.A1 == sys.A);
  CHECK(sys.M.is_scalar_identity());
}

TEST_CASE("config validation") {
  HeatConfig cfg;
  cfg.nx = 2;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = HeatConfig{};
  cfg.nt = 205;  // 205 * 0.1 is not an integer
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("sweep region endpoints and coverage") {
  const Vec x = heat_xgrid(50);
  MovingRegion sweep;
  const Vec m0 = region_mask(sweep, 0.0, 1.0, x);
  const Vec m1 = region_mask(sweep, 1.0, 1.0, x);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    CHECK(m0(j) == (x(j) <= 0.5 ? 1.0 : 0.0));
    CHECK(m1(j) == (x(j) >= kPi - 0.5 ? 1.0 : 0.0));
  }
  Vec covered = Vec::Zero(x.size());
  for (int k = 0; k <= 200; ++k) covered += region_mask(sweep, k / 200.0, 1.0, x);
  CHECK(covered.minCoeff() >= 1.0);
  const auto [lo, hi] = sweep.interval(1.0, 1.0);
  CHECK(lo == doctest::Approx(kPi - 0.5));
  CHECK(hi == doctest::Approx(kPi));
}

TEST_CASE("regions leaving the domain are config errors") {
  MovingRegion fixed;
  fixed.kind = MovingRegion::Kind::kFixed;
  fixed.left = 3.0;
  fixed.right = 3.5;
  try {
    region_mask(fixed, 0.0, 1.0, heat_xgrid(10));
    FAIL("region outside [0, pi] accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
}

TEST_CASE("flow regions") {
  const Vec x = heat_xgrid(50);
  SUBCASE("zero velocity keeps the region fixed") {
    MovingRegion flow;
    flow.kind = MovingRegion::Kind::kFlow;
    flow.left = 1.0;
    flow.right = 1.5;
    const Vec m0 = region_mask(flow, 0.0, 1.0, x);
    for (double t : {0.25, 0.5, 1.0}) CHECK(region_mask(flow, t, 1.0, x) == m0);
  }
  SUBCASE("RK4 endpoints match a refined Euler integration") {
    MovingRegion flow;
    flow.kind = MovingRegion::Kind::kFlow;
    flow.left = 0.2;
    flow.right = 0.7;
    flow.c0 = 0.5;
    flow.c1 = 0.1;
    flow.c2 = 0.05;
    const int fine = 100 * flow.flow_steps;
    auto euler = [&](double x0) {
      double xv = x0;
      const double s = 1.0 / fine;
      for (int i = 0; i < fine; ++i) xv += s * (flow.c0 + flow.c1 * xv + flow.c2 * i * s);
      return xv;
    };
    const auto [lo, hi] = flow.interval(1.0, 1.0);
    CHECK(std::abs(lo - euler(0.2)) <= 1e-6);
    CHECK(std::abs(hi - euler(0.7)) <= 1e-6);
  }
}

TEST_CASE("spectral semigroup oracle") {
  const int nx = 50;
  const Vec x = heat_xgrid(nx);
  SUBCASE("first eigenfunction decays by e^{-t}") {
    const auto r = spectral_apply(psi(1, x), 1.0, 5);
    CHECK((r.profile - std::exp(-1.0) * psi(1, x)).norm() <= 1e-12);
    CHECK_FALSE(r.truncated);
  }
  SUBCASE("t = 0 reproduces a profile in the span") {
    CounterRng rng(4);
    const Vec p = rng.uniform_vec(nx, -1, 1);
    CHECK((spectral_apply(p, 0.0, nx).profile - p).norm() <= 1e-10 * p.norm());
  }
  SUBCASE("mode requests beyond the grid are flagged") {
    const auto r = spectral_apply(psi(1, x), 0.5, nx + 10);
    CHECK(r.truncated);
    CHECK(r.modes_used == nx);
  }
}

TEST_CASE("spectral control map") {
  const Vec x = heat_xgrid(50);
  CHECK((spectral_control_map({1.0}, x) - (2.0 * psi(1, x) + psi(2, x))).norm() <= 1e-13);
  CHECK(spectral_control_map({0.0, 0.0}, x).isZero(0.0));
  CHECK((spectral_control_map({0.0, 1.0}, x) - psi(3, x)).norm() <= 1e-13);
}

TEST_CASE("pure heat flow") {
  SUBCASE("zero control decays like e^{-t}") {
    const auto cfg = pure_heat(50, 200);
    const auto y = pure_heat_run(cfg);
    const double ratio = y.at(200).norm() / y.at(0).norm();
    CHECK(std::abs(ratio - std::exp(-1.0)) <= 5e-3);
  }
  SUBCASE("energy never increases") {
    const auto y = pure_heat_run(pure_heat(30, 100));
    for (int k = 0; k < 100; ++k) CHECK(y.at(k + 1).norm() <= y.at(k).norm() + 1e-15);
  }
  SUBCASE("agreement with the spectral oracle") {
    auto cfg = pure_heat(50, 200);
    cfg.profile = [](double s) { return std::sin(s) + 0.5 * std::sin(3.0 * s) - 0.2 * std::sin(4.0 * s); };
    const auto y = pure_heat_run(cfg);
    const Vec p0 = y.at(0);
    const Vec oracle = spectral_apply(p0, 1.0, 50).profile;
    CHECK((y.at(200) - oracle).cwiseAbs().maxCoeff() <= 2e-2);
  }
}

TEST_CASE("experiment runner") {
  SUBCASE("zero history with zero control stays at rest") {
    auto cfg = pure_heat(20, 100);
    cfg.profile = [](double) { return 0.0; };
    const auto res = run_experiment(cfg);
    CHECK(res.trajectory.values.isZero(0.0));
    CHECK(res.report.all());
  }
  SUBCASE("sweep configuration with the explicit control") {
    HeatConfig cfg;
    const auto res = run_experiment(cfg);
    CHECK(res.trajectory.node_count() == 221);
    CHECK(res.l2_norms.size() == 221);
    CHECK(std::isfinite(res.memory_residual));
    CHECK(res.window_sup >= res.report.res_a);
    CHECK(res.window_sup == doctest::Approx(res.report.res_c));
    CHECK(res.control(10, 0) == 0.0);
    const auto fig = extend_to_figure(cfg, res);
    CHECK(fig.last_node() == 220);
    CHECK((fig.values.leftCols(221) - res.trajectory.values).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("csv artifacts") {
    auto cfg = pure_heat(5, 20);
    const auto res = run_experiment(cfg);
    const auto dir = std::filesystem::temp_directory_path() / "dmc_heat_test";
    std::filesystem::create_directories(dir);
    write_field_csv((dir / "field.csv").string(), res.trajectory, res.x);
    write_norms_csv((dir / "norms.csv").string(), res);
    std::ifstream field(dir / "field.csv");
    std::string header;
    std::getline(field, header);
    CHECK(header == "t,x,y");
    int rows = 0;
    for (std::string line; std::getline(field, line);) ++rows;
    CHECK(rows == 5 * 23);  // nodes -D..N with D = 2
    std::ifstream norms(dir / "norms.csv");
    std::getline(norms, header);
    CHECK(header == "t,l2_norm");
  }
}

TEST_CASE("sweeping region beats a fixed one for the window condition") {
  HeatConfig cfg;
  cfg.nx = 20;
  cfg.nt = 100;
  cfg.control = HeatControl::kSynthesized;
  cfg.synthesis.max_outer = 6;
  const auto sweep = run_experiment(cfg);
  cfg.region.kind = MovingRegion::Kind::kFixed;
  cfg.region.left = 1.3;
  cfg.region.right = 1.8;
  const auto fixed = run_experiment(cfg);
  MESSAGE("sweep res_c " << sweep.report.res_c << ", fixed res_c " << fixed.report.res_c);
  CHECK(sweep.report.res_c < fixed.report.res_c);
}
