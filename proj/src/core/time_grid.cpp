#include "dmc/core/time_grid.hpp"

#include <cmath>
#include <sstream>

#include "dmc/errors.hpp"

namespace dmc {

namespace {

int integer_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-9 * std::max(1.0, std::abs(r))) {
    std::ostringstream os;
    os << what << " " << num << " is not an integer multiple of dt=" << den;
    fail(ErrorKind::kGrid, os.str());
  }
  return static_cast<int>(k);
}

}  // namespace

TimeGrid TimeGrid::uniform(double t_end, int n_steps, double delay,
                           double t_start) {
  require(n_steps >= 1, ErrorKind::kGrid, "grid needs at least one step");
  require(t_end > t_start, ErrorKind::kGrid, "grid end must exceed start");
  require(delay >= 0.0, ErrorKind::kGrid, "delay must be non-negative");
  TimeGrid g;
  g.t_start = t_start;
  g.t_end = t_end;
  g.n_steps = n_steps;
  g.dt = (t_end - t_start) / n_steps;
  g.delay_steps = integer_ratio(delay, g.dt, "delay");
  return g;
}

TimeGrid TimeGrid::with_step(double t_start, double t_end, double dt,
                             double delay) {
  require(dt > 0.0, ErrorKind::kGrid, "dt must be positive");
  require(t_end > t_start, ErrorKind::kGrid, "grid end must exceed start");
  require(delay >= 0.0, ErrorKind::kGrid, "delay must be non-negative");
  TimeGrid g;
  g.t_start = t_start;
  g.t_end = t_end;
  g.dt = dt;
  g.n_steps = integer_ratio(t_end - t_start, dt, "horizon");
  require(g.n_steps >= 1, ErrorKind::kGrid, "grid needs at least one step");
  g.delay_steps = integer_ratio(delay, dt, "delay");
  return g;
}

int TimeGrid::index_of(double t) const {
  const double r = (t - t_start) / dt;
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-9) {
    std::ostringstream os;
    os << "time " << t << " is not aligned with the grid (dt=" << dt << ")";
    fail(ErrorKind::kGrid, os.str());
  }
  return static_cast<int>(k);
}

TimeGrid TimeGrid::refined(int factor) const {
  require(factor >= 1, ErrorKind::kGrid, "refinement factor must be >= 1");
  TimeGrid g = *this;
  g.dt = dt / factor;
  g.n_steps = n_steps * factor;
  g.delay_steps = delay_steps * factor;
  return g;
}

}  // namespace dmc
