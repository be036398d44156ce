#include "dmc/forward/delay_system.hpp"

#include <cmath>
#include <limits>

#include "dmc/errors.hpp"

namespace dmc {

ControlMap ControlMap::constant(Mat b) {
  ControlMap c;
  c.kind_ = Kind::kConstant;
  c.rows_ = static_cast<int>(b.rows());
  c.cols_ = static_cast<int>(b.cols());
  c.mats_.push_back(std::move(b));
  return c;
}

ControlMap ControlMap::sampled(std::vector<Mat> per_node) {
  require(!per_node.empty(), ErrorKind::kShape, "sampled control map is empty");
  ControlMap c;
  c.kind_ = Kind::kSampled;
  c.rows_ = static_cast<int>(per_node.front().rows());
  c.cols_ = static_cast<int>(per_node.front().cols());
  for (const Mat& b : per_node) {
    require(b.rows() == c.rows_ && b.cols() == c.cols_, ErrorKind::kShape,
            "sampled control map has inconsistent shapes");
  }
  c.mats_ = std::move(per_node);
  return c;
}

ControlMap ControlMap::diagonal_mask(Mat masks) {
  require(masks.rows() >= 1 && masks.cols() >= 1, ErrorKind::kShape,
          "mask control map is empty");
  ControlMap c;
  c.kind_ = Kind::kDiagonalMask;
  c.rows_ = static_cast<int>(masks.rows());
  c.cols_ = c.rows_;
  c.masks_ = std::move(masks);
  return c;
}

int ControlMap::node_count() const {
  switch (kind_) {
    case Kind::kSampled:
      return static_cast<int>(mats_.size());
    case Kind::kDiagonalMask:
      return static_cast<int>(masks_.cols());
    case Kind::kConstant:
      break;
  }
  return std::numeric_limits<int>::max();
}

void ControlMap::check_node(int k) const {
  require(k >= 0 && k < node_count(), ErrorKind::kRange,
          "control map evaluated outside its sampled nodes");
}

Mat ControlMap::at(int k) const {
  check_node(k);
  switch (kind_) {
    case Kind::kConstant:
      return mats_.front();
    case Kind::kSampled:
      return mats_[k];
    case Kind::kDiagonalMask:
      return masks_.col(k).asDiagonal();
  }
  return {};
}

void ControlMap::apply(int k, const double* u, double alpha,
                       double* out) const {
  check_node(k);
  if (kind_ == Kind::kDiagonalMask) {
    const double* mask = masks_.data() + static_cast<Eigen::Index>(k) * rows_;
    for (int i = 0; i < rows_; ++i) out[i] += alpha * mask[i] * u[i];
    return;
  }
  const Mat& b = kind_ == Kind::kConstant ? mats_.front() : mats_[k];
  Eigen::Map<Vec>(out, rows_).noalias() +=
      alpha * b * Eigen::Map<const Vec>(u, cols_);
}

void ControlMap::apply_transpose(int k, const double* w, double alpha,
                                 double* out) const {
  check_node(k);
  if (kind_ == Kind::kDiagonalMask) {
    const double* mask = masks_.data() + static_cast<Eigen::Index>(k) * rows_;
    for (int i = 0; i < rows_; ++i) out[i] += alpha * mask[i] * w[i];
    return;
  }
  const Mat& b = kind_ == Kind::kConstant ? mats_.front() : mats_[k];
  Eigen::Map<Vec>(out, cols_).noalias() +=
      alpha * b.transpose() * Eigen::Map<const Vec>(w, rows_);
}

ControlMap ControlMap::select_columns(const std::vector<int>& columns) const {
  require(kind_ != Kind::kDiagonalMask, ErrorKind::kShape,
          "column selection is not defined for mask control maps");
  for (int c : columns) {
    require(c >= 0 && c < cols_, ErrorKind::kShape, "column index out of range");
  }
  auto pick = [&](const Mat& b) {
    Mat out(b.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out.col(static_cast<Eigen::Index>(j)) = b.col(columns[j]);
    }
    return out;
  };
  if (kind_ == Kind::kConstant) return constant(pick(mats_.front()));
  std::vector<Mat> picked;
  picked.reserve(mats_.size());
  for (const Mat& b : mats_) picked.push_back(pick(b));
  return sampled(std::move(picked));
}

void DelaySystem::validate() const {
  const auto nn = A.rows();
  require(nn >= 1 && A.cols() == nn, ErrorKind::kShape, "A must be square");
  require(A1.rows() == nn && A1.cols() == nn, ErrorKind::kShape,
          "A1 must match A");
  require(M.dim() == nn && Mtilde.dim() == nn, ErrorKind::kShape,
          "memory kernels must match the state dimension");
  require(B.rows() == nn && B.cols() >= 1, ErrorKind::kShape,
          "control map rows must match the state dimension");
  require(history.dim() == nn, ErrorKind::kShape,
          "history dimension must match the state dimension");
  require(h > 0.0, ErrorKind::kConfig, "delay h must be positive");
  require(T > h, ErrorKind::kWindow, "horizon T must exceed the delay h");
}

void DelaySystem::validate(const TimeGrid& grid) const {
  validate();
  require(std::abs(grid.t_start) < 1e-12, ErrorKind::kGrid,
          "grid must start at t = 0");
  require(std::abs(grid.t_end - T) <= 1e-9 * T, ErrorKind::kGrid,
          "grid must end at T");
  require(std::abs(grid.delay() - h) <= 1e-9 * h, ErrorKind::kGrid,
          "grid delay_steps * dt must equal h");
  require(history.delay_steps() == grid.delay_steps &&
              std::abs(history.dt() - grid.dt) <= 1e-12 * grid.dt,
          ErrorKind::kGrid, "history samples must sit on the grid");
  require(M.max_time() >= T * (1.0 - 1e-12), ErrorKind::kRange,
          "sampled kernel M must cover [0, T]");
  require(Mtilde.max_time() >= T * (1.0 - 1e-12), ErrorKind::kRange,
          "sampled kernel Mtilde must cover [0, T]");
  require(B.node_count() >= grid.n_steps + 1, ErrorKind::kRange,
          "time-varying control map must cover every grid node");
}

TimeGrid DelaySystem::grid(int n_steps) const {
  return TimeGrid::uniform(T, n_steps, h);
}

}  // namespace dmc
