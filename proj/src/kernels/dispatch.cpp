#include "minipic/kernels/dispatch.hpp"

#include "impl.hpp"

namespace minipic::kernels {

const char* to_string(Arch a) {
  return a == Arch::scalar ? "scalar" : "avx2";
}

bool avx2_available() {
#if defined(MINIPIC_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Arch detect_arch() {
  return avx2_available() ? Arch::avx2 : Arch::scalar;
}

const Kernels& kernels_for(Arch a) {
#ifdef MINIPIC_HAVE_AVX2
  if (a == Arch::avx2) {
    if (!avx2_available())
      throw usage_error("avx2 kernels requested but not supported by this CPU");
    static const Kernels k = {Arch::avx2,       push_chunk_avx2,
                              curl_line_avx2,   curl_line_j_avx2,
                              sum_squares_avx2, kinetic_sum_avx2};
    return k;
  }
#else
  if (a == Arch::avx2)
    throw usage_error("avx2 kernels not built for this target");
#endif
  return scalar_kernels();
}

}  // namespace minipic::kernels
