#pragma once

// Dense double-precision inner loops used by the solvers. Every kernel has a
// scalar reference implementation; vector variants (AVX2+FMA on x86-64, NEON
// on AArch64) are selected once at runtime and must agree with the reference
// to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace dmc::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa) noexcept;

/// Column-major view: column j starts at data + j * ld.
struct ColMajorView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t ld = 0;
};

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += alpha * A * x
  void (*gemv)(double alpha, ColMajorView a, const double* x, double* y);
  // y += alpha * A^T * x
  void (*gemv_t)(double alpha, ColMajorView a, const double* x, double* y);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(double alpha, ColMajorView a, const double* x, double* y);
void gemv_t(double alpha, ColMajorView a, const double* x, double* y);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(double alpha, ColMajorView a, const double* x, double* y);
void gemv_t(double alpha, ColMajorView a, const double* x, double* y);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(double alpha, ColMajorView a, const double* x, double* y);
void gemv_t(double alpha, ColMajorView a, const double* x, double* y);
}  // namespace neon
#endif

/// Best ISA the running CPU supports.
Isa detect_isa() noexcept;

/// ISA currently used by the free functions below.
Isa active_isa() noexcept;

/// Overrides the dispatch (tests, benchmarking). Falls back to scalar when
/// the requested ISA is unavailable; returns the ISA actually installed.
Isa set_active_isa(Isa isa) noexcept;

bool isa_available(Isa isa) noexcept;

const KernelTable& table_for(Isa isa) noexcept;
const KernelTable& active_table() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_table().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_table().axpy(alpha, x.data(), y.data(), x.size());
}

inline void gemv(double alpha, ColMajorView a, std::span<const double> x,
                 std::span<double> y) {
  active_table().gemv(alpha, a, x.data(), y.data());
}

inline void gemv_t(double alpha, ColMajorView a, std::span<const double> x,
                   std::span<double> y) {
  active_table().gemv_t(alpha, a, x.data(), y.data());
}

}  // namespace dmc::simd
