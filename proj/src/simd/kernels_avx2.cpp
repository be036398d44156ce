#include <immintrin.h>

#include "dmc/simd/kernels.hpp"

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

namespace dmc::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(double alpha, ColMajorView a, const double* x, double* y) {
  // Four columns per pass so each y block is loaded and stored once.
  std::size_t j = 0;
  for (; j + 4 <= a.cols; j += 4) {
    const double* c0 = a.data + j * a.ld;
    const double* c1 = c0 + a.ld;
    const double* c2 = c1 + a.ld;
    const double* c3 = c2 + a.ld;
    const __m256d s0 = _mm256_set1_pd(alpha * x[j]);
    const __m256d s1 = _mm256_set1_pd(alpha * x[j + 1]);
    const __m256d s2 = _mm256_set1_pd(alpha * x[j + 2]);
    const __m256d s3 = _mm256_set1_pd(alpha * x[j + 3]);
    std::size_t i = 0;
    for (; i + 4 <= a.rows; i += 4) {
      __m256d vy = _mm256_loadu_pd(y + i);
      vy = _mm256_fmadd_pd(s0, _mm256_loadu_pd(c0 + i), vy);
      vy = _mm256_fmadd_pd(s1, _mm256_loadu_pd(c1 + i), vy);
      vy = _mm256_fmadd_pd(s2, _mm256_loadu_pd(c2 + i), vy);
      vy = _mm256_fmadd_pd(s3, _mm256_loadu_pd(c3 + i), vy);
      _mm256_storeu_pd(y + i, vy);
    }
    for (; i < a.rows; ++i) {
      y[i] += alpha * (x[j] * c0[i] + x[j + 1] * c1[i] + x[j + 2] * c2[i] +
                       x[j + 3] * c3[i]);
    }
  }
  for (; j < a.cols; ++j) axpy(alpha * x[j], a.data + j * a.ld, y, a.rows);
}

void gemv_t(double alpha, ColMajorView a, const double* x, double* y) {
  for (std::size_t j = 0; j < a.cols; ++j) {
    y[j] += alpha * dot(a.data + j * a.ld, x, a.rows);
  }
}

}  // namespace dmc::simd::avx2
