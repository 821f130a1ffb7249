#pragma once

#include <cmath>

#include "minipic/lanes.hpp"
#include "minipic/types.hpp"

// Scalar particle-update arithmetic shared by the reference kernel, the
// public boris_kick / eval_eb entry points, and (op for op) the SIMD
// kernels. Every expression here uses only +, -, *, / and sqrt in a fixed
// association order; the vector kernels replicate the exact sequence so a
// particle takes the same bit pattern through either path. Keep the two in
// sync when touching anything below.

namespace minipic::kernels {

struct EB {
  real_t ex = 0, ey = 0, ez = 0;
  real_t bx = 0, by = 0, bz = 0;
};

inline real_t gamma_of(real_t ux, real_t uy, real_t uz) {
  const real_t usq = (ux * ux + uy * uy) + uz * uz;
  return std::sqrt(real_t(1) + usq);
}

/// Staggered-cell field reconstruction at offsets (x, y, z) in [-1, 1].
/// c[lane] points at lane 0 of the coefficient buffer; voxel v's value for a
/// lane sits at c[lane][v * stride].
inline void eval_eb_lanes(const real_t* const c[interp_var::count],
                          std::ptrdiff_t stride, voxel_id v, real_t x,
                          real_t y, real_t z, EB& f) {
  namespace iv = interp_var;
  const std::ptrdiff_t o = static_cast<std::ptrdiff_t>(v) * stride;
  f.ex = ((c[iv::ex][o] + y * c[iv::dexdy][o]) + z * c[iv::dexdz][o]) +
         (y * z) * c[iv::d2exdydz][o];
  f.ey = ((c[iv::ey][o] + z * c[iv::deydz][o]) + x * c[iv::deydx][o]) +
         (z * x) * c[iv::d2eydzdx][o];
  f.ez = ((c[iv::ez][o] + x * c[iv::dezdx][o]) + y * c[iv::dezdy][o]) +
         (x * y) * c[iv::d2ezdxdy][o];
  f.bx = c[iv::cbx][o] + x * c[iv::dcbxdx][o];
  f.by = c[iv::cby][o] + y * c[iv::dcbydy][o];
  f.bz = c[iv::cbz][o] + z * c[iv::dcbzdz][o];
}

/// Momentum update: half E-acceleration, B rotation, half E-acceleration.
/// With exact_gyration the rotation half-angle is rescaled to tan(theta/2)
/// so the gyration angle per step is exact rather than second order.
inline void boris_kick_inline(real_t& ux, real_t& uy, real_t& uz, const EB& f,
                              real_t qdt_2m, bool exact_gyration) {
  const real_t emx = qdt_2m * f.ex;
  const real_t emy = qdt_2m * f.ey;
  const real_t emz = qdt_2m * f.ez;
  const real_t umx = ux + emx;
  const real_t umy = uy + emy;
  const real_t umz = uz + emz;
  const real_t gm = gamma_of(umx, umy, umz);
  const real_t rg = qdt_2m / gm;
  real_t tx = f.bx * rg;
  real_t ty = f.by * rg;
  real_t tz = f.bz * rg;
  if (exact_gyration) {
    const real_t tl = std::sqrt((tx * tx + ty * ty) + tz * tz);
    if (tl > 0) {
      const real_t sc = std::tan(tl) / tl;
      tx = tx * sc;
      ty = ty * sc;
      tz = tz * sc;
    }
  }
  const real_t upx = umx + (umy * tz - umz * ty);
  const real_t upy = umy + (umz * tx - umx * tz);
  const real_t upz = umz + (umx * ty - umy * tx);
  const real_t tsq = (tx * tx + ty * ty) + tz * tz;
  const real_t sf = real_t(2) / (real_t(1) + tsq);
  const real_t sx = tx * sf;
  const real_t sy = ty * sf;
  const real_t sz = tz * sf;
  ux = (umx + (upy * sz - upz * sy)) + emx;
  uy = (umy + (upz * sx - upx * sz)) + emy;
  uz = (umz + (upx * sy - upy * sx)) + emz;
}

}  // namespace minipic::kernels
