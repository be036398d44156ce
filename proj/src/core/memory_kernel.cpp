#include "dmc/core/memory_kernel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dmc/errors.hpp"
#include "dmc/simd/kernels.hpp"

namespace dmc {

namespace {

bool is_multiple_of_identity(const Mat& m, double* scale) {
  const double s = m.rows() > 0 ? m(0, 0) : 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double expected = i == j ? s : 0.0;
      if (m(i, j) != expected) return false;
    }
  }
  *scale = s;
  return true;
}

void check_square(const std::vector<Mat>& mats, int* dim) {
  require(!mats.empty(), ErrorKind::kShape, "kernel needs at least one matrix");
  const auto n = mats.front().rows();
  for (const Mat& m : mats) {
    require(m.rows() == n && m.cols() == n, ErrorKind::kShape,
            "kernel matrices must be square with a common dimension");
  }
  *dim = static_cast<int>(n);
}

}  // namespace

MemoryKernel MemoryKernel::zero(int dim) {
  require(dim >= 1, ErrorKind::kShape, "kernel dimension must be positive");
  MemoryKernel k;
  k.form_ = Form::kZero;
  k.dim_ = dim;
  k.classify();
  return k;
}

MemoryKernel MemoryKernel::constant(Mat g) {
  MemoryKernel k;
  k.form_ = Form::kConstant;
  k.mats_.push_back(std::move(g));
  check_square(k.mats_, &k.dim_);
  k.classify();
  return k;
}

MemoryKernel MemoryKernel::exp_poly(double rate, std::vector<Mat> coeffs) {
  MemoryKernel k;
  k.form_ = Form::kExpPoly;
  k.rate_ = rate;
  k.mats_ = std::move(coeffs);
  check_square(k.mats_, &k.dim_);
  k.classify();
  return k;
}

MemoryKernel MemoryKernel::scalar_exp_poly(int dim, double rate,
                                           const std::vector<double>& coeffs) {
  std::vector<Mat> mats;
  mats.reserve(coeffs.size());
  for (double c : coeffs) mats.push_back(c * Mat::Identity(dim, dim));
  return exp_poly(rate, std::move(mats));
}

MemoryKernel MemoryKernel::sampled(double spacing, std::vector<Mat> samples) {
  require(spacing > 0.0, ErrorKind::kShape, "sample spacing must be positive");
  require(samples.size() >= 2, ErrorKind::kShape,
          "sampled kernel needs at least two samples");
  MemoryKernel k;
  k.form_ = Form::kSampled;
  k.spacing_ = spacing;
  k.mats_ = std::move(samples);
  check_square(k.mats_, &k.dim_);
  k.classify();
  return k;
}

void MemoryKernel::classify() {
  scalar_identity_ = true;
  scalars_.clear();
  for (const Mat& m : mats_) {
    double s = 0.0;
    if (!is_multiple_of_identity(m, &s)) {
      scalar_identity_ = false;
      scalars_.clear();
      return;
    }
    scalars_.push_back(s);
  }
}

double MemoryKernel::max_time() const {
  if (form_ == Form::kSampled) {
    return spacing_ * static_cast<double>(mats_.size() - 1);
  }
  return std::numeric_limits<double>::infinity();
}

void MemoryKernel::check_time(double t) const {
  if (t < 0.0) {
    std::ostringstream os;
    os << "kernel evaluated at negative time " << t;
    fail(ErrorKind::kDomain, os.str());
  }
  if (form_ == Form::kSampled && t > max_time() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "kernel evaluated at t=" << t << " beyond sample table end "
       << max_time();
    fail(ErrorKind::kRange, os.str());
  }
}

Mat MemoryKernel::eval(double t) const {
  check_time(t);
  switch (form_) {
    case Form::kZero:
      return Mat::Zero(dim_, dim_);
    case Form::kConstant:
      return mats_.front();
    case Form::kExpPoly: {
      // Horner in t, then the exponential factor.
      Mat acc = mats_.back();
      for (auto k = static_cast<int>(mats_.size()) - 2; k >= 0; --k) {
        acc = acc * t + mats_[k];
      }
      return std::exp(rate_ * t) * acc;
    }
    case Form::kSampled: {
      const double r = t / spacing_;
      auto i = static_cast<std::size_t>(std::floor(r));
      if (i >= mats_.size() - 1) i = mats_.size() - 2;
      const double w = std::min(1.0, r - static_cast<double>(i));
      return (1.0 - w) * mats_[i] + w * mats_[i + 1];
    }
  }
  return Mat::Zero(dim_, dim_);
}

double MemoryKernel::eval_scalar(double t) const {
  require(scalar_identity_, ErrorKind::kUnsupportedKernel,
          "kernel is not a multiple of the identity");
  check_time(t);
  switch (form_) {
    case Form::kZero:
      return 0.0;
    case Form::kConstant:
      return scalars_.front();
    case Form::kExpPoly: {
      double acc = scalars_.back();
      for (auto k = static_cast<int>(scalars_.size()) - 2; k >= 0; --k) {
        acc = acc * t + scalars_[k];
      }
      return std::exp(rate_ * t) * acc;
    }
    case Form::kSampled: {
      const double r = t / spacing_;
      auto i = static_cast<std::size_t>(std::floor(r));
      if (i >= scalars_.size() - 1) i = scalars_.size() - 2;
      const double w = std::min(1.0, r - static_cast<double>(i));
      return (1.0 - w) * scalars_[i] + w * scalars_[i + 1];
    }
  }
  return 0.0;
}

Mat MemoryKernel::derivative(double t) const {
  check_time(t);
  switch (form_) {
    case Form::kZero:
    case Form::kConstant:
      return Mat::Zero(dim_, dim_);
    case Form::kExpPoly: {
      // d/dt e^{at} p(t) = e^{at} (a p(t) + p'(t))
      const auto K = static_cast<int>(mats_.size()) - 1;
      Mat p = mats_.back();
      for (int k = K - 1; k >= 0; --k) p = p * t + mats_[k];
      Mat dp = Mat::Zero(dim_, dim_);
      if (K >= 1) {
        dp = K * mats_[K];
        for (int k = K - 1; k >= 1; --k) dp = dp * t + k * mats_[k];
      }
      return std::exp(rate_ * t) * (rate_ * p + dp);
    }
    case Form::kSampled:
      break;
  }
  fail(ErrorKind::kUnsupportedKernel,
       "sampled kernels have no analytic derivative");
}

MemoryKernel MemoryKernel::transposed() const {
  MemoryKernel k = *this;
  for (Mat& m : k.mats_) m.transposeInPlace();
  return k;
}

LagTable::LagTable(const MemoryKernel& kernel, double dt, int count)
    : count_(count),
      dim_(kernel.dim()),
      zero_(kernel.is_zero()),
      scalar_(kernel.is_scalar_identity()) {
  if (zero_) return;
  if (scalar_) {
    scalars_.resize(count);
    for (int j = 0; j < count; ++j) scalars_[j] = kernel.eval_scalar(j * dt);
  } else {
    mats_.reserve(count);
    for (int j = 0; j < count; ++j) mats_.push_back(kernel.eval(j * dt));
  }
}

Mat LagTable::matrix(int j) const {
  if (zero_) return Mat::Zero(dim_, dim_);
  if (scalar_) return scalars_[j] * Mat::Identity(dim_, dim_);
  return mats_[j];
}

void LagTable::accumulate(int j, double alpha, const double* x, double* out,
                          bool transpose) const {
  if (zero_) return;
  const auto n = static_cast<std::size_t>(dim_);
  if (scalar_) {
    simd::active_table().axpy(alpha * scalars_[j], x, out, n);
    return;
  }
  const simd::ColMajorView view{mats_[j].data(), n, n, n};
  if (transpose) {
    simd::active_table().gemv_t(alpha, view, x, out);
  } else {
    simd::active_table().gemv(alpha, view, x, out);
  }
}

}  // namespace dmc
