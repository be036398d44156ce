#include <atomic>

#include "dmc/simd/kernels.hpp"

namespace dmc::simd {

namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy, &scalar::gemv,
                                   &scalar::gemv_t};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy, &avx2::gemv,
                                 &avx2::gemv_t};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeonTable{&neon::dot, &neon::axpy, &neon::gemv,
                                 &neon::gemv_t};
#endif

std::atomic<const KernelTable*> g_active{nullptr};
std::atomic<Isa> g_active_isa{Isa::kScalar};

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
    case Isa::kScalar:
      break;
  }
  return "scalar";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() noexcept {
  if (isa_available(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_available(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

const KernelTable& table_for(Isa isa) noexcept {
  if (!isa_available(isa)) return kScalarTable;
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2:
      return kAvx2Table;
#endif
#if defined(__aarch64__)
    case Isa::kNeon:
      return kNeonTable;
#endif
    default:
      return kScalarTable;
  }
}

Isa set_active_isa(Isa isa) noexcept {
  if (!isa_available(isa)) isa = Isa::kScalar;
  g_active.store(&table_for(isa));
  g_active_isa.store(isa);
  return isa;
}

Isa active_isa() noexcept {
  active_table();
  return g_active_isa.load();
}

const KernelTable& active_table() noexcept {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    set_active_isa(detect_isa());
    t = g_active.load(std::memory_order_acquire);
  }
  return *t;
}

}  // namespace dmc::simd
