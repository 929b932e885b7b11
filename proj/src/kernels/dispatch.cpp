#include <cstdlib>
#include <cstring>

#include "walign/kernels.hpp"

namespace walign::kernels {

#if defined(WALIGN_BUILD_AVX2)
const KernelTable& avx2_table();
#endif

const KernelTable* avx2() {
#if defined(WALIGN_BUILD_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* env = std::getenv("WALIGN_KERNELS");
    if (env && std::strcmp(env, "scalar") == 0) return scalar();
    if (const KernelTable* wide = avx2()) return *wide;
    return scalar();
  }();
  return table;
}

}  // namespace walign::kernels
