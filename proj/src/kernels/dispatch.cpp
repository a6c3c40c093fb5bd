#include <cstdio>
#include <cstdlib>
#include <string>

#include "baryflow/kernels/simd.hpp"

namespace baryflow::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& pick() {
  const char* env = std::getenv("BARYFLOW_SIMD");
  const std::string want = env ? env : "";
  if (want == "scalar") return scalar_kernels();
  if (want == "avx2") {
    if (const KernelTable* t = avx2_kernels(); t && cpu_has_avx2()) return *t;
    std::fprintf(stderr, "baryflow: BARYFLOW_SIMD=avx2 unavailable, using scalar kernels\n");
    return scalar_kernels();
  }
  if (want == "neon") {
    if (const KernelTable* t = neon_kernels()) return *t;
    std::fprintf(stderr, "baryflow: BARYFLOW_SIMD=neon unavailable, using scalar kernels\n");
    return scalar_kernels();
  }
  if (!want.empty()) {
    std::fprintf(stderr, "baryflow: unknown BARYFLOW_SIMD value '%s', using auto selection\n",
                 want.c_str());
  }
  if (const KernelTable* t = avx2_kernels(); t && cpu_has_avx2()) return *t;
  if (const KernelTable* t = neon_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& chosen = pick();
  return chosen;
}

}  // namespace baryflow::kernels
