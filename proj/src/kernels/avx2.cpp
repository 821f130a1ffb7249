// AVX2 kernel lane. Mirrors the scalar reference operation for operation:
// no FMA contraction, no reciprocal/rsqrt approximations, divisions and
// square roots via the IEEE-rounded vector instructions, so every particle
// and every stencil element produces the same bits as the scalar lane. The
// equivalence suite asserts this exactly.

#include <immintrin.h>

#include <cstdint>

#include "minipic/kernels/push_math.hpp"

#include "impl.hpp"

namespace minipic::kernels {

namespace {

#ifdef MINIPIC_SINGLE_PRECISION

constexpr int W = 8;
using vreal = __m256;
using vids = __m256i;

inline vreal vload(const real_t* p) { return _mm256_loadu_ps(p); }
inline void vstore(real_t* p, vreal v) { _mm256_storeu_ps(p, v); }
inline vreal vset1(real_t s) { return _mm256_set1_ps(s); }
inline vreal vadd(vreal a, vreal b) { return _mm256_add_ps(a, b); }
inline vreal vsub(vreal a, vreal b) { return _mm256_sub_ps(a, b); }
inline vreal vmul(vreal a, vreal b) { return _mm256_mul_ps(a, b); }
inline vreal vdiv(vreal a, vreal b) { return _mm256_div_ps(a, b); }
inline vreal vsqrt(vreal a) { return _mm256_sqrt_ps(a); }
inline vids vload_ids(const voxel_id* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}
inline vreal vgather(const real_t* base, vids idx) {
  return _mm256_i32gather_ps(base, idx, 4);
}

#else

constexpr int W = 4;
using vreal = __m256d;
using vids = __m128i;

inline vreal vload(const real_t* p) { return _mm256_loadu_pd(p); }
inline void vstore(real_t* p, vreal v) { _mm256_storeu_pd(p, v); }
inline vreal vset1(real_t s) { return _mm256_set1_pd(s); }
inline vreal vadd(vreal a, vreal b) { return _mm256_add_pd(a, b); }
inline vreal vsub(vreal a, vreal b) { return _mm256_sub_pd(a, b); }
inline vreal vmul(vreal a, vreal b) { return _mm256_mul_pd(a, b); }
inline vreal vdiv(vreal a, vreal b) { return _mm256_div_pd(a, b); }
inline vreal vsqrt(vreal a) { return _mm256_sqrt_pd(a); }
inline vids vload_ids(const voxel_id* p) {
  return _mm_loadu_si128(reinterpret_cast<const __m128i*>(p));
}
inline vreal vgather(const real_t* base, vids idx) {
  return _mm256_i32gather_pd(base, idx, 8);
}

#endif

static_assert(W == simd_block, "reduction block must match vector width");

inline vreal vgamma(vreal ux, vreal uy, vreal uz) {
  const vreal usq = vadd(vadd(vmul(ux, ux), vmul(uy, uy)), vmul(uz, uz));
  return vsqrt(vadd(vset1(1), usq));
}

}  // namespace

void push_chunk_avx2(const PushArgs& a) {
  const std::size_t nb = a.count / W;
  const vreal one = vset1(1);
  const vreal vcx = vset1(a.cx), vcy = vset1(a.cy), vcz = vset1(a.cz);
  const vreal eps = vset1(a.qdt_2m);

  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t i = b * W;
    vreal ux = vload(a.ux + i), uy = vload(a.uy + i), uz = vload(a.uz + i);

    const vids gidx = vload_ids(a.ids + i);
    const vreal px = vload(a.dx + i), py = vload(a.dy + i),
                pz = vload(a.dz + i);

    namespace iv = interp_var;
    auto co = [&](int lane) { return vgather(a.interp[lane], gidx); };
    const vreal fex =
        vadd(vadd(vadd(co(iv::ex), vmul(py, co(iv::dexdy))),
                  vmul(pz, co(iv::dexdz))),
             vmul(vmul(py, pz), co(iv::d2exdydz)));
    const vreal fey =
        vadd(vadd(vadd(co(iv::ey), vmul(pz, co(iv::deydz))),
                  vmul(px, co(iv::deydx))),
             vmul(vmul(pz, px), co(iv::d2eydzdx)));
    const vreal fez =
        vadd(vadd(vadd(co(iv::ez), vmul(px, co(iv::dezdx))),
                  vmul(py, co(iv::dezdy))),
             vmul(vmul(px, py), co(iv::d2ezdxdy)));
    const vreal fbx = vadd(co(iv::cbx), vmul(px, co(iv::dcbxdx)));
    const vreal fby = vadd(co(iv::cby), vmul(py, co(iv::dcbydy)));
    const vreal fbz = vadd(co(iv::cbz), vmul(pz, co(iv::dcbzdz)));

    // Boris kick (exact_gyration is routed to the scalar lane upstream).
    const vreal emx = vmul(eps, fex);
    const vreal emy = vmul(eps, fey);
    const vreal emz = vmul(eps, fez);
    const vreal umx = vadd(ux, emx);
    const vreal umy = vadd(uy, emy);
    const vreal umz = vadd(uz, emz);
    const vreal gm = vgamma(umx, umy, umz);
    const vreal trg = vdiv(eps, gm);
    const vreal tx = vmul(fbx, trg);
    const vreal ty = vmul(fby, trg);
    const vreal tz = vmul(fbz, trg);
    const vreal upx = vadd(umx, vsub(vmul(umy, tz), vmul(umz, ty)));
    const vreal upy = vadd(umy, vsub(vmul(umz, tx), vmul(umx, tz)));
    const vreal upz = vadd(umz, vsub(vmul(umx, ty), vmul(umy, tx)));
    const vreal tsq = vadd(vadd(vmul(tx, tx), vmul(ty, ty)), vmul(tz, tz));
    const vreal sf = vdiv(vset1(2), vadd(one, tsq));
    const vreal sx = vmul(tx, sf);
    const vreal sy = vmul(ty, sf);
    const vreal sz = vmul(tz, sf);
    ux = vadd(vadd(umx, vsub(vmul(upy, sz), vmul(upz, sy))), emx);
    uy = vadd(vadd(umy, vsub(vmul(upz, sx), vmul(upx, sz))), emy);
    uz = vadd(vadd(umz, vsub(vmul(upx, sy), vmul(upy, sx))), emz);

    // Full move with the updated momentum.
    const vreal rg = vdiv(one, vgamma(ux, uy, uz));
    vstore(a.end_x + i, vadd(px, vmul(vmul(ux, rg), vcx)));
    vstore(a.end_y + i, vadd(py, vmul(vmul(uy, rg), vcy)));
    vstore(a.end_z + i, vadd(pz, vmul(vmul(uz, rg), vcz)));

    vstore(a.ux + i, ux);
    vstore(a.uy + i, uy);
    vstore(a.uz + i, uz);
  }

  const std::size_t done = nb * W;
  if (done < a.count) {
    PushArgs tail = a;
    tail.dx = a.dx + done;
    tail.dy = a.dy + done;
    tail.dz = a.dz + done;
    tail.ux = a.ux + done;
    tail.uy = a.uy + done;
    tail.uz = a.uz + done;
    tail.ids = a.ids + done;
    tail.end_x = a.end_x + done;
    tail.end_y = a.end_y + done;
    tail.end_z = a.end_z + done;
    tail.count = a.count - done;
    push_chunk_scalar(tail);
  }
}

void curl_line_avx2(real_t* dst, const real_t* p1, const real_t* p0, real_t c1,
                    const real_t* q1, const real_t* q0, real_t c2,
                    std::size_t n) {
  const vreal vc1 = vset1(c1), vc2 = vset1(c2);
  const std::size_t nb = n / W;
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t i = b * W;
    vreal d = vload(dst + i);
    d = vadd(d, vmul(vc1, vsub(vload(p1 + i), vload(p0 + i))));
    d = vadd(d, vmul(vc2, vsub(vload(q1 + i), vload(q0 + i))));
    vstore(dst + i, d);
  }
  const std::size_t done = nb * W;
  curl_line_scalar(dst + done, p1 + done, p0 + done, c1, q1 + done, q0 + done,
                   c2, n - done);
}

void curl_line_j_avx2(real_t* dst, const real_t* p1, const real_t* p0,
                      real_t c1, const real_t* q1, const real_t* q0, real_t c2,
                      const real_t* r, real_t c3, std::size_t n) {
  const vreal vc1 = vset1(c1), vc2 = vset1(c2), vc3 = vset1(c3);
  const std::size_t nb = n / W;
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t i = b * W;
    vreal d = vload(dst + i);
    d = vadd(d, vmul(vc1, vsub(vload(p1 + i), vload(p0 + i))));
    d = vadd(d, vmul(vc2, vsub(vload(q1 + i), vload(q0 + i))));
    d = vadd(d, vmul(vc3, vload(r + i)));
    vstore(dst + i, d);
  }
  const std::size_t done = nb * W;
  curl_line_j_scalar(dst + done, p1 + done, p0 + done, c1, q1 + done,
                     q0 + done, c2, r + done, c3, n - done);
}

real_t sum_squares_avx2(const real_t* x, std::ptrdiff_t stride,
                        std::size_t n) {
  if (stride != 1) return sum_squares_scalar(x, stride, n);
  vreal vp = vset1(0);
  const std::size_t nb = n / W;
  for (std::size_t b = 0; b < nb; ++b) {
    const vreal v = vload(x + b * W);
    vp = vadd(vp, vmul(v, v));
  }
  alignas(32) real_t p[simd_block];
  vstore(p, vp);
  for (std::size_t k = nb * W; k < n; ++k) p[k % simd_block] += x[k] * x[k];
  return collapse_partials(p);
}

real_t kinetic_sum_avx2(const real_t* ux, const real_t* uy, const real_t* uz,
                        const real_t* w, std::ptrdiff_t stride, real_t m,
                        std::size_t n) {
  if (stride != 1) return kinetic_sum_scalar(ux, uy, uz, w, stride, m, n);
  const vreal one = vset1(1);
  const vreal vm = vset1(m);
  vreal vp = vset1(0);
  const std::size_t nb = n / W;
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t i = b * W;
    const vreal gm = vgamma(vload(ux + i), vload(uy + i), vload(uz + i));
    vp = vadd(vp, vmul(vmul(vload(w + i), vm), vsub(gm, one)));
  }
  alignas(32) real_t p[simd_block];
  vstore(p, vp);
  for (std::size_t k = nb * W; k < n; ++k) {
    const real_t gm = gamma_of(ux[k], uy[k], uz[k]);
    p[k % simd_block] += (w[k] * m) * (gm - real_t(1));
  }
  return collapse_partials(p);
}

}  // namespace minipic::kernels
