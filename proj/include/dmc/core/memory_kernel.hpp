#pragma once

#include <vector>

#include "dmc/core/types.hpp"

namespace dmc {

/// Matrix-valued Volterra kernel M(t), t >= 0.
///
/// Forms:
///  - Zero:      M(t) = 0.
///  - Constant:  M(t) = G.
///  - ExpPoly:   M(t) = e^{a t} * sum_k C_k t^k.
///  - Sampled:   piecewise-linear interpolation of a uniformly spaced table
///               starting at t = 0.
class MemoryKernel {
 public:
  enum class Form { kZero, kConstant, kExpPoly, kSampled };

  MemoryKernel() = default;

  static MemoryKernel zero(int dim);
  static MemoryKernel constant(Mat g);
  static MemoryKernel exp_poly(double rate, std::vector<Mat> coeffs);
  /// ExpPoly whose coefficients are c_k * I.
  static MemoryKernel scalar_exp_poly(int dim, double rate,
                                      const std::vector<double>& coeffs);
  static MemoryKernel sampled(double spacing, std::vector<Mat> samples);

  Form form() const { return form_; }
  int dim() const { return dim_; }
  double rate() const { return rate_; }
  double spacing() const { return spacing_; }
  const std::vector<Mat>& coeffs() const { return mats_; }

  /// Largest t at which the kernel can be evaluated.
  double max_time() const;

  bool is_zero() const { return form_ == Form::kZero; }

  /// True when every stored matrix is a multiple of the identity, so the
  /// kernel acts as a scalar function times I.
  bool is_scalar_identity() const { return scalar_identity_; }

  /// M(t). Throws kDomain for t < 0 and kRange beyond a sampled table.
  Mat eval(double t) const;

  /// Scalar profile m(t) with M(t) = m(t) I; only valid when
  /// is_scalar_identity().
  double eval_scalar(double t) const;

  /// M'(t) for the analytic forms; kUnsupportedKernel for Sampled.
  Mat derivative(double t) const;

  /// Same kernel with every matrix transposed.
  MemoryKernel transposed() const;

 private:
  void check_time(double t) const;
  void classify();

  Form form_ = Form::kZero;
  int dim_ = 0;
  double rate_ = 0.0;
  double spacing_ = 0.0;
  std::vector<Mat> mats_;
  std::vector<double> scalars_;
  bool scalar_identity_ = true;
};

/// Kernel values at lags j * dt, j = 0 .. count-1, with a fast path for
/// scalar-times-identity kernels.
class LagTable {
 public:
  LagTable() = default;
  LagTable(const MemoryKernel& kernel, double dt, int count);

  int size() const { return count_; }
  int dim() const { return dim_; }
  bool is_zero() const { return zero_; }
  bool is_scalar() const { return scalar_; }

  double scalar(int j) const { return scalars_[j]; }
  Mat matrix(int j) const;

  /// out += alpha * M(j dt) x, or alpha * M(j dt)^T x when transpose is set.
  void accumulate(int j, double alpha, const double* x, double* out,
                  bool transpose = false) const;

 private:
  int count_ = 0;
  int dim_ = 0;
  bool zero_ = true;
  bool scalar_ = true;
  std::vector<double> scalars_;
  std::vector<Mat> mats_;
};

}  // namespace dmc
