#pragma once

#include "minipic/kernels/dispatch.hpp"

// Raw kernel entry points shared between translation units; the avx2 lane
// reuses the scalar functions for block remainders.

namespace minipic::kernels {

void push_chunk_scalar(const PushArgs& a);
void curl_line_scalar(real_t* dst, const real_t* p1, const real_t* p0,
                      real_t c1, const real_t* q1, const real_t* q0, real_t c2,
                      std::size_t n);
void curl_line_j_scalar(real_t* dst, const real_t* p1, const real_t* p0,
                        real_t c1, const real_t* q1, const real_t* q0,
                        real_t c2, const real_t* r, real_t c3, std::size_t n);
real_t sum_squares_scalar(const real_t* x, std::ptrdiff_t stride,
                          std::size_t n);
real_t kinetic_sum_scalar(const real_t* ux, const real_t* uy, const real_t* uz,
                          const real_t* w, std::ptrdiff_t stride, real_t m,
                          std::size_t n);

/// Collapse simd_block partials with a fixed halving tree.
inline real_t collapse_partials(real_t* p) {
  for (int h = simd_block / 2; h > 0; h >>= 1)
    for (int j = 0; j < h; ++j) p[j] += p[j + h];
  return p[0];
}

#ifdef MINIPIC_HAVE_AVX2
void push_chunk_avx2(const PushArgs& a);
void curl_line_avx2(real_t* dst, const real_t* p1, const real_t* p0, real_t c1,
                    const real_t* q1, const real_t* q0, real_t c2,
                    std::size_t n);
void curl_line_j_avx2(real_t* dst, const real_t* p1, const real_t* p0,
                      real_t c1, const real_t* q1, const real_t* q0, real_t c2,
                      const real_t* r, real_t c3, std::size_t n);
real_t sum_squares_avx2(const real_t* x, std::ptrdiff_t stride, std::size_t n);
real_t kinetic_sum_avx2(const real_t* ux, const real_t* uy, const real_t* uz,
                        const real_t* w, std::ptrdiff_t stride, real_t m,
                        std::size_t n);
#endif

}  // namespace minipic::kernels
