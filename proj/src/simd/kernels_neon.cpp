#include <arm_neon.h>

#include "dmc/simd/kernels.hpp"

namespace dmc::simd::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(double alpha, ColMajorView a, const double* x, double* y) {
  for (std::size_t j = 0; j < a.cols; ++j) {
    const double s = alpha * x[j];
    if (s == 0.0) continue;
    axpy(s, a.data + j * a.ld, y, a.rows);
  }
}

void gemv_t(double alpha, ColMajorView a, const double* x, double* y) {
  for (std::size_t j = 0; j < a.cols; ++j) {
    y[j] += alpha * dot(a.data + j * a.ld, x, a.rows);
  }
}

}  // namespace dmc::simd::neon
