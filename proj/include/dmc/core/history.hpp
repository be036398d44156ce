#pragma once

#include <functional>

#include "dmc/core/time_grid.hpp"
#include "dmc/core/types.hpp"

namespace dmc {

/// Initial history phi on [-h, 0], stored at the delay_steps + 1 grid nodes
/// theta_j = -h + j dt. Column j of values() is phi(theta_j); the last column
/// is phi(0).
class HistoryFunction {
 public:
  HistoryFunction() = default;
  HistoryFunction(Mat values, double dt);

  static HistoryFunction zero(int dim, const TimeGrid& grid);
  static HistoryFunction constant(const Vec& v, const TimeGrid& grid);
  /// Zero on [-h, 0) and v at theta = 0.
  static HistoryFunction pulse(const Vec& v, const TimeGrid& grid);
  static HistoryFunction from_function(
      int dim, const TimeGrid& grid,
      const std::function<Vec(double theta)>& phi);

  int dim() const { return static_cast<int>(values_.rows()); }
  int delay_steps() const { return static_cast<int>(values_.cols()) - 1; }
  double dt() const { return dt_; }
  double delay() const { return dt_ * delay_steps(); }

  const Mat& values() const { return values_; }

  /// phi at node theta_j with j in [-delay_steps, 0].
  Eigen::Ref<const Vec> at_node(int j) const {
    return values_.col(j + delay_steps());
  }

  /// Linear interpolation; kDomain outside [-h, 0].
  Vec eval(double theta) const;

  /// True when every sample before theta = 0 is exactly zero.
  bool vanishes_before_zero() const;

  HistoryFunction scaled(double alpha) const;

 private:
  Mat values_;
  double dt_ = 0.0;
};

}  // namespace dmc
