#pragma once

#include <vector>

#include "dmc/core/history.hpp"
#include "dmc/core/memory_kernel.hpp"
#include "dmc/core/time_grid.hpp"
#include "dmc/core/types.hpp"

namespace dmc {

/// Control operator B(t): constant, sampled per grid node, or a per-node
/// diagonal 0/1 mask (square, used for spatial restriction).
class ControlMap {
 public:
  enum class Kind { kConstant, kSampled, kDiagonalMask };

  ControlMap() = default;

  static ControlMap constant(Mat b);
  static ControlMap sampled(std::vector<Mat> per_node);
  /// masks is n x node_count; B at node k is diag(masks.col(k)).
  static ControlMap diagonal_mask(Mat masks);

  Kind kind() const { return kind_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool time_varying() const { return kind_ != Kind::kConstant; }
  /// Nodes covered by a time-varying map (unbounded for constant maps).
  int node_count() const;

  Mat at(int k) const;

  /// out += alpha * B(t_k) u
  void apply(int k, const double* u, double alpha, double* out) const;
  /// out += alpha * B(t_k)^T w
  void apply_transpose(int k, const double* w, double alpha,
                       double* out) const;

  /// Keeps only the listed columns (constant and sampled maps).
  ControlMap select_columns(const std::vector<int>& columns) const;

 private:
  void check_node(int k) const;

  Kind kind_ = Kind::kConstant;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Mat> mats_;
  Mat masks_;
};

/// y'(t) = A y(t) + A1 y(t-h) + int_0^t M(t-s) y(s) ds + B(t) u(t) on [0,T],
/// y = phi on [-h, 0]. Mtilde is the kernel of the terminal memory
/// condition and drives the adjoint forcing.
struct DelaySystem {
  Mat A;
  Mat A1;
  MemoryKernel M;
  MemoryKernel Mtilde;
  ControlMap B;
  double h = 0.0;
  double T = 0.0;
  HistoryFunction history;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return B.cols(); }

  /// Shape and window checks; with a grid, also alignment and coverage of
  /// sampled kernels / control maps.
  void validate() const;
  void validate(const TimeGrid& grid) const;

  /// Grid with n_steps steps on [0, T] for this system's delay.
  TimeGrid grid(int n_steps) const;
};

}  // namespace dmc
