#include "dmc/simd/kernels.hpp"

namespace dmc::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
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

}  // namespace dmc::simd::scalar
