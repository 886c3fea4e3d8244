#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "shapereg/simd/kernels.hpp"

namespace shapereg::simd {

namespace {

constexpr KernelTable kScalar{Backend::Scalar, &scalar::amss_row, &scalar::distance_row,
                              &scalar::project_points};
#ifdef SHAPEREG_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2{Backend::Avx2, &avx2::amss_row, &avx2::distance_row,
                            &avx2::project_points};
#endif

const KernelTable* pick_initial() {
  if (const char* env = std::getenv("SHAPEREG_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && available(Backend::Avx2)) return &table(Backend::Avx2);
  }
  if (available(Backend::Avx2)) return &table(Backend::Avx2);
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{pick_initial()};
  return ptr;
}

}  // namespace

const char* name(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

bool available(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if defined(SHAPEREG_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Backend backend) {
  if (!available(backend)) {
    throw std::invalid_argument(std::string("SIMD backend not available: ") + name(backend));
  }
#ifdef SHAPEREG_HAVE_AVX2_KERNELS
  if (backend == Backend::Avx2) return kAvx2;
#endif
  return kScalar;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_active(Backend backend) { current().store(&table(backend), std::memory_order_release); }

}  // namespace shapereg::simd
