#include "dmc/core/history.hpp"

#include <algorithm>
#include <cmath>

#include "dmc/errors.hpp"

namespace dmc {

HistoryFunction::HistoryFunction(Mat values, double dt)
    : values_(std::move(values)), dt_(dt) {
  require(values_.cols() >= 1 && values_.rows() >= 1, ErrorKind::kShape,
          "history needs at least one sample");
  require(dt_ > 0.0, ErrorKind::kGrid, "history spacing must be positive");
}

HistoryFunction HistoryFunction::zero(int dim, const TimeGrid& grid) {
  return HistoryFunction(Mat::Zero(dim, grid.delay_steps + 1), grid.dt);
}

HistoryFunction HistoryFunction::constant(const Vec& v, const TimeGrid& grid) {
  Mat values = v.replicate(1, grid.delay_steps + 1);
  return HistoryFunction(std::move(values), grid.dt);
}

HistoryFunction HistoryFunction::pulse(const Vec& v, const TimeGrid& grid) {
  Mat values = Mat::Zero(v.size(), grid.delay_steps + 1);
  values.col(grid.delay_steps) = v;
  return HistoryFunction(std::move(values), grid.dt);
}

HistoryFunction HistoryFunction::from_function(
    int dim, const TimeGrid& grid,
    const std::function<Vec(double theta)>& phi) {
  Mat values(dim, grid.delay_steps + 1);
  for (int j = 0; j <= grid.delay_steps; ++j) {
    const double theta = (j - grid.delay_steps) * grid.dt;
    Vec v = phi(theta);
    require(v.size() == dim, ErrorKind::kShape,
            "history function returned a vector of the wrong size");
    values.col(j) = v;
  }
  return HistoryFunction(std::move(values), grid.dt);
}

Vec HistoryFunction::eval(double theta) const {
  const double h = delay();
  const double tol = 1e-12 * std::max(1.0, h);
  require(theta >= -h - tol && theta <= tol, ErrorKind::kDomain,
          "history evaluated outside [-h, 0]");
  if (delay_steps() == 0) return values_.col(0);
  const double r = std::clamp((theta + h) / dt_, 0.0,
                              static_cast<double>(delay_steps()));
  auto i = static_cast<int>(std::floor(r));
  if (i >= delay_steps()) i = delay_steps() - 1;
  const double w = r - i;
  return (1.0 - w) * values_.col(i) + w * values_.col(i + 1);
}

bool HistoryFunction::vanishes_before_zero() const {
  return delay_steps() == 0 ||
         values_.leftCols(delay_steps()).cwiseAbs().maxCoeff() == 0.0;
}

HistoryFunction HistoryFunction::scaled(double alpha) const {
  return HistoryFunction(alpha * values_, dt_);
}

}  // namespace dmc
