#pragma once

namespace minipic {

/// Particle record lanes: voxel-relative offsets in [-1, 1], normalized
/// momentum u = gamma*v, and quasiparticle weight. The voxel index lives in
/// a separate integer buffer.
namespace particle_var {
enum p_v {
  dx = 0,
  dy,
  dz,
  ux,
  uy,
  uz,
  w,
  count
};
}  // namespace particle_var

/// Field record lanes, one record per padded voxel. E on edges, B on faces,
/// J on edges, charge density on nodes. tca*/rhob are reserved and stay zero.
namespace field_var {
enum f_v {
  ex = 0,
  ey,
  ez,
  div_e_err,
  cbx,
  cby,
  cbz,
  div_b_err,
  jfx,
  jfy,
  jfz,
  rhof,
  tcax,
  tcay,
  tcaz,
  rhob,
  count
};
}  // namespace field_var

/// Interpolation coefficients, 18 per voxel. Each E component carries its
/// value, two transverse gradients and the transverse cross term; each B
/// component carries its value and longitudinal gradient.
namespace interp_var {
enum i_v {
  ex = 0,
  dexdy,
  dexdz,
  d2exdydz,
  ey,
  deydz,
  deydx,
  d2eydzdx,
  ez,
  dezdx,
  dezdy,
  d2ezdxdy,
  cbx,
  dcbxdx,
  cby,
  dcbydy,
  cbz,
  dcbzdz,
  count
};
}  // namespace interp_var

/// Current accumulator lanes, 12 per voxel: 4 edges per direction. For
/// direction a the four lanes are ordered (low,low), (high,low), (low,high),
/// (high,high) over the two transverse axes taken in cyclic order
/// (x -> yz, y -> zx, z -> xy).
namespace accum_var {
enum a_v {
  jx0 = 0,  // (y lo, z lo)
  jx1,      // (y hi, z lo)
  jx2,      // (y lo, z hi)
  jx3,      // (y hi, z hi)
  jy0,      // (z lo, x lo)
  jy1,      // (z hi, x lo)
  jy2,      // (z lo, x hi)
  jy3,      // (z hi, x hi)
  jz0,      // (x lo, y lo)
  jz1,      // (x hi, y lo)
  jz2,      // (x lo, y hi)
  jz3,      // (x hi, y hi)
  count
};
}  // namespace accum_var

}  // namespace minipic
