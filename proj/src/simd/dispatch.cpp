#include <cstdlib>
#include <string_view>

#include "reefsim/simd/kernels.hpp"

namespace reefsim::simd {

#if !defined(REEFSIM_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(REEFSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* forced = std::getenv("REEFSIM_SIMD"); forced && std::string_view(forced) == "scalar")
    return scalar_kernels();
  if (const KernelTable* avx2 = avx2_kernels(); avx2 != nullptr && cpu_has_avx2()) return *avx2;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace reefsim::simd
