#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace rmsa::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(RMSA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* forced = std::getenv("RMSA_KERNELS"); forced && std::string_view(forced) == "scalar")
    return scalar();
  if (const KernelTable* t = avx2()) return *t;
  return scalar();
}

}  // namespace

const KernelTable& scalar() { return detail::kScalarTable; }

const KernelTable* avx2() {
#if defined(RMSA_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace rmsa::kernels
