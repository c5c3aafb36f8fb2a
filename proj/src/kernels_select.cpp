#include "pbeam/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace pbeam {
namespace {

const Kernels& select() {
#if PBEAM_HAVE_AVX2
  const bool cpu_ok =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  const bool cpu_ok = false;
#endif
  if (const char* env = std::getenv("PBEAM_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return scalar_kernels();
#if PBEAM_HAVE_AVX2
    if (std::strcmp(env, "avx2") == 0 && cpu_ok) return avx2_kernels();
#endif
    // Unknown or unsupported request: fall through to auto-detection.
  }
#if PBEAM_HAVE_AVX2
  if (cpu_ok) return avx2_kernels();
#endif
  return scalar_kernels();
}

} // namespace

const Kernels& kernels() {
  static const Kernels& chosen = select();
  return chosen;
}

} // namespace pbeam
