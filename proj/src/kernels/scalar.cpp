#include "minipic/kernels/push_math.hpp"

#include "impl.hpp"

namespace minipic::kernels {

void push_chunk_scalar(const PushArgs& a) {
  const std::ptrdiff_t s = a.pstride;
  for (std::size_t i = 0; i < a.count; ++i) {
    const std::ptrdiff_t o = static_cast<std::ptrdiff_t>(i) * s;
    real_t ux = a.ux[o], uy = a.uy[o], uz = a.uz[o];

    // Fields at the stored position: the kick is centered between the
    // incoming and outgoing momentum half-steps.
    EB f;
    eval_eb_lanes(a.interp, a.istride, a.ids[i], a.dx[o], a.dy[o], a.dz[o],
                  f);

    boris_kick_inline(ux, uy, uz, f, a.qdt_2m, a.exact_gyration);

    // Full move with the updated momentum; end offsets stay in the starting
    // voxel's frame for the mover, which also deposits along this exact
    // displacement so charge continuity is exact.
    const real_t gm = gamma_of(ux, uy, uz);
    const real_t rg = real_t(1) / gm;
    a.end_x[i] = a.dx[o] + (ux * rg) * a.cx;
    a.end_y[i] = a.dy[o] + (uy * rg) * a.cy;
    a.end_z[i] = a.dz[o] + (uz * rg) * a.cz;

    a.ux[o] = ux;
    a.uy[o] = uy;
    a.uz[o] = uz;
  }
}

void curl_line_scalar(real_t* dst, const real_t* p1, const real_t* p0,
                      real_t c1, const real_t* q1, const real_t* q0, real_t c2,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    dst[i] = (dst[i] + c1 * (p1[i] - p0[i])) + c2 * (q1[i] - q0[i]);
}

void curl_line_j_scalar(real_t* dst, const real_t* p1, const real_t* p0,
                        real_t c1, const real_t* q1, const real_t* q0,
                        real_t c2, const real_t* r, real_t c3, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    dst[i] = ((dst[i] + c1 * (p1[i] - p0[i])) + c2 * (q1[i] - q0[i])) +
             c3 * r[i];
}

real_t sum_squares_scalar(const real_t* x, std::ptrdiff_t stride,
                          std::size_t n) {
  real_t p[simd_block] = {};
  for (std::size_t k = 0; k < n; ++k) {
    const real_t v = x[static_cast<std::ptrdiff_t>(k) * stride];
    p[k % simd_block] += v * v;
  }
  return collapse_partials(p);
}

real_t kinetic_sum_scalar(const real_t* ux, const real_t* uy, const real_t* uz,
                          const real_t* w, std::ptrdiff_t stride, real_t m,
                          std::size_t n) {
  real_t p[simd_block] = {};
  for (std::size_t k = 0; k < n; ++k) {
    const std::ptrdiff_t o = static_cast<std::ptrdiff_t>(k) * stride;
    const real_t gm = gamma_of(ux[o], uy[o], uz[o]);
    p[k % simd_block] += (w[o] * m) * (gm - real_t(1));
  }
  return collapse_partials(p);
}

const Kernels& scalar_kernels() {
  static const Kernels k = {Arch::scalar,       push_chunk_scalar,
                            curl_line_scalar,   curl_line_j_scalar,
                            sum_squares_scalar, kinetic_sum_scalar};
  return k;
}

}  // namespace minipic::kernels
