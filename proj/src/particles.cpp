#include "minipic/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minipic/kernels/push_math.hpp"

namespace minipic {

namespace pv = particle_var;
namespace iv = interp_var;
namespace fv = field_var;
namespace av = accum_var;

const char* to_string(SortOrder o) {
  return o == SortOrder::blocked ? "blocked" : "interleaved";
}

real_t bspline(int order, real_t xi) {
  switch (order) {
    case 0:
      return (xi >= real_t(-0.5) && xi < real_t(0.5)) ? real_t(1) : real_t(0);
    case 1: {
      const real_t t = real_t(1) - std::fabs(xi);
      return t > 0 ? t : real_t(0);
    }
    case 2: {
      const real_t a = std::fabs(xi);
      if (a <= real_t(0.5)) return real_t(0.75) - a * a;
      if (a <= real_t(1.5)) {
        const real_t t = real_t(1.5) - a;
        return real_t(0.5) * t * t;
      }
      return 0;
    }
    default:
      throw usage_error("bspline: unsupported order " + std::to_string(order));
  }
}

void load_interpolators(const FieldArray& fa, const GridDescriptor& g,
                        InterpolatorArray& out, ThreadPool* pool) {
  const FieldedBuffer& f = fa.f;
  FieldedBuffer& c = out.c;
  const voxel_id sx = g.stride_x(), sy = g.stride_y(), sz = g.stride_z();

  auto line = [&](int iy, int iz) {
    for (int ix = 1; ix <= g.nx; ++ix) {
      const auto v =
          static_cast<std::size_t>(voxel_of_unchecked(ix, iy, iz, g));
      real_t w0, w1, w2, w3;

      // ex on the 4 surrounding x edges; transverse axes (y, z).
      w0 = f(v, fv::ex);
      w1 = f(v + sy, fv::ex);
      w2 = f(v + sz, fv::ex);
      w3 = f(v + sy + sz, fv::ex);
      c(v, iv::ex) = real_t(0.25) * ((w3 + w0) + (w1 + w2));
      c(v, iv::dexdy) = real_t(0.25) * ((w3 - w0) + (w1 - w2));
      c(v, iv::dexdz) = real_t(0.25) * ((w3 - w0) - (w1 - w2));
      c(v, iv::d2exdydz) = real_t(0.25) * ((w3 + w0) - (w1 + w2));

      // ey; transverse axes (z, x).
      w0 = f(v, fv::ey);
      w1 = f(v + sz, fv::ey);
      w2 = f(v + sx, fv::ey);
      w3 = f(v + sz + sx, fv::ey);
      c(v, iv::ey) = real_t(0.25) * ((w3 + w0) + (w1 + w2));
      c(v, iv::deydz) = real_t(0.25) * ((w3 - w0) + (w1 - w2));
      c(v, iv::deydx) = real_t(0.25) * ((w3 - w0) - (w1 - w2));
      c(v, iv::d2eydzdx) = real_t(0.25) * ((w3 + w0) - (w1 + w2));

      // ez; transverse axes (x, y).
      w0 = f(v, fv::ez);
      w1 = f(v + sx, fv::ez);
      w2 = f(v + sy, fv::ez);
      w3 = f(v + sx + sy, fv::ez);
      c(v, iv::ez) = real_t(0.25) * ((w3 + w0) + (w1 + w2));
      c(v, iv::dezdx) = real_t(0.25) * ((w3 - w0) + (w1 - w2));
      c(v, iv::dezdy) = real_t(0.25) * ((w3 - w0) - (w1 - w2));
      c(v, iv::d2ezdxdy) = real_t(0.25) * ((w3 + w0) - (w1 + w2));

      // B faces: value and longitudinal gradient.
      w0 = f(v, fv::cbx);
      w1 = f(v + sx, fv::cbx);
      c(v, iv::cbx) = real_t(0.5) * (w1 + w0);
      c(v, iv::dcbxdx) = real_t(0.5) * (w1 - w0);
      w0 = f(v, fv::cby);
      w1 = f(v + sy, fv::cby);
      c(v, iv::cby) = real_t(0.5) * (w1 + w0);
      c(v, iv::dcbydy) = real_t(0.5) * (w1 - w0);
      w0 = f(v, fv::cbz);
      w1 = f(v + sz, fv::cbz);
      c(v, iv::cbz) = real_t(0.5) * (w1 + w0);
      c(v, iv::dcbzdz) = real_t(0.5) * (w1 - w0);
    }
  };

  if (pool && pool->worker_count() > 1) {
    pool->for_ranges(static_cast<std::size_t>(g.nz),
                     [&](int, std::size_t zb, std::size_t ze) {
                       for (std::size_t z = zb; z < ze; ++z)
                         for (int iy = 1; iy <= g.ny; ++iy)
                           line(iy, static_cast<int>(z) + 1);
                     });
  } else {
    for (int iz = 1; iz <= g.nz; ++iz)
      for (int iy = 1; iy <= g.ny; ++iy) line(iy, iz);
  }
}

void eval_eb(const InterpolatorArray& interp, voxel_id v, real_t dx, real_t dy,
             real_t dz, vec3& e_out, vec3& b_out) {
  const real_t* lanes[iv::count];
  for (int l = 0; l < iv::count; ++l)
    lanes[l] = interp.c.field_ptr(static_cast<std::size_t>(l));
  kernels::EB f;
  kernels::eval_eb_lanes(lanes, interp.c.record_stride(), v, dx, dy, dz, f);
  e_out = {f.ex, f.ey, f.ez};
  b_out = {f.bx, f.by, f.bz};
}

vec3 boris_kick(const vec3& u, const vec3& e, const vec3& b, real_t q,
                real_t m, real_t dt, bool exact_gyration) {
  if (!(m > 0) || !(dt > 0)) throw usage_error("boris_kick: need m > 0, dt > 0");
  kernels::EB f{e.x, e.y, e.z, b.x, b.y, b.z};
  real_t ux = u.x, uy = u.y, uz = u.z;
  const real_t qdt_2m = q * dt / (2 * m);
  kernels::boris_kick_inline(ux, uy, uz, f, qdt_2m, exact_gyration);
  return {ux, uy, uz};
}

namespace {

// 12-lane charge-conserving weights for one in-cell segment. For direction a
// with transverse midpoints (m1, m2) and transverse displacements (d1, d2),
// lane (s1, s2) receives qw * da * [(1 + s1 m1)(1 + s2 m2) + s1 s2 d1 d2 / 12] / 4.
// The four weights of a direction sum to exactly qw * da: the cross terms
// cancel pairwise, which is what keeps node charge continuity exact.
inline void deposit_weights(const real_t mid[3], const real_t disp[3],
                            real_t qw, real_t out[av::count]) {
  const real_t twelfth = real_t(1) / real_t(12);
  auto dir = [&](real_t da, real_t m1, real_t m2, real_t d1, real_t d2,
                 real_t* four) {
    const real_t base = real_t(0.25) * (qw * da);
    const real_t p1l = 1 - m1, p1h = 1 + m1;
    const real_t p2l = 1 - m2, p2h = 1 + m2;
    const real_t cc = (d1 * d2) * twelfth;
    four[0] = base * (p1l * p2l + cc);
    four[1] = base * (p1h * p2l - cc);
    four[2] = base * (p1l * p2h - cc);
    four[3] = base * (p1h * p2h + cc);
  };
  dir(disp[0], mid[1], mid[2], disp[1], disp[2], out + av::jx0);
  dir(disp[1], mid[2], mid[0], disp[2], disp[0], out + av::jy0);
  dir(disp[2], mid[0], mid[1], disp[0], disp[1], out + av::jz0);
}

constexpr real_t face_slack =
    64 * std::numeric_limits<real_t>::epsilon();

}  // namespace

void deposit_segment(voxel_id voxel, const real_t mid[3], const real_t disp[3],
                     real_t qw, ScatterBuffer& sb, int worker) {
  for (int a = 0; a < 3; ++a) {
    if (std::fabs(mid[a]) + real_t(0.5) * std::fabs(disp[a]) >
        real_t(1) + face_slack)
      throw usage_error("deposit_segment: segment spans a cell face on axis " +
                        std::to_string(a));
  }
  if (voxel < 0 || static_cast<std::size_t>(voxel) >= sb.num_slots())
    throw usage_error("deposit_segment: voxel out of range");
  real_t w[av::count];
  deposit_weights(mid, disp, qw, w);
  sb.contribute_row(worker, static_cast<std::size_t>(voxel), w);
}

namespace {

// Splits the straight path from offsets s to s + d (start-voxel frame) at
// cell faces and hands each piece to sink(voxel, mid, disp). At most one
// crossing per axis can occur under the CFL bound. Returns the final offsets
// (in [-1, 1]) and the final unwrapped padded voxel.
template <class Sink>
inline void run_mover(const GridDescriptor& g, voxel_id v0, const real_t s[3],
                      const real_t d[3], Sink&& sink, real_t out_q[3],
                      voxel_id& out_v) {
  for (int a = 0; a < 3; ++a) {
    if (!(std::fabs(d[a]) < 2))
      throw run_abort(
          "advance_particles: particle crossed more than one cell along axis " +
          std::to_string(a) + " (CFL violation)");
  }
  const voxel_id stride[3] = {g.stride_x(), g.stride_y(), g.stride_z()};
  real_t q[3] = {s[0], s[1], s[2]};
  real_t r[3] = {d[0], d[1], d[2]};
  voxel_id v = v0;
  // One crossing per axis plus slack for zero-length bounce segments that
  // rounding at a face can produce.
  for (int pass = 0; pass < 8; ++pass) {
    int axis = -1;
    real_t fmin = 1;
    for (int a = 0; a < 3; ++a) {
      const real_t e = q[a] + r[a];
      if (e > 1 || e < -1) {
        const real_t sigma = r[a] > 0 ? real_t(1) : real_t(-1);
        const real_t fa = (sigma - q[a]) / r[a];
        if (axis < 0 || fa < fmin) {
          axis = a;
          fmin = fa;
        }
      }
    }
    if (axis < 0) {
      const real_t mid[3] = {q[0] + real_t(0.5) * r[0],
                             q[1] + real_t(0.5) * r[1],
                             q[2] + real_t(0.5) * r[2]};
      sink(v, mid, r);
      out_q[0] = q[0] + r[0];
      out_q[1] = q[1] + r[1];
      out_q[2] = q[2] + r[2];
      out_v = v;
      return;
    }
    const real_t sigma = r[axis] > 0 ? real_t(1) : real_t(-1);
    real_t seg[3] = {fmin * r[0], fmin * r[1], fmin * r[2]};
    const real_t mid[3] = {q[0] + real_t(0.5) * seg[0],
                           q[1] + real_t(0.5) * seg[1],
                           q[2] + real_t(0.5) * seg[2]};
    sink(v, mid, seg);
    for (int a = 0; a < 3; ++a) {
      q[a] = q[a] + seg[a];
      r[a] = r[a] - seg[a];
    }
    q[axis] = -sigma;  // enter the adjacent voxel's frame
    v += sigma > 0 ? stride[axis] : -stride[axis];
  }
  throw run_abort("advance_particles: mover failed to terminate");
}

}  // namespace

void DepositStage::resize(std::size_t n) {
  v0.resize(n);
  sx.resize(n);
  sy.resize(n);
  sz.resize(n);
  dx.resize(n);
  dy.resize(n);
  dz.resize(n);
}

void advance_particles(Species& sp, const InterpolatorArray& interp,
                       ScatterBuffer& sb, const GridDescriptor& g,
                       std::size_t chunk_size, const kernels::Kernels& k,
                       ThreadPool* pool, bool exact_gyration,
                       DepositStage* stage) {
  ParticleStore& st = sp.store;
  const std::size_t n = st.size();
  if (n == 0) return;
  if (chunk_size == 0) throw usage_error("advance_particles: chunk_size == 0");

  const std::ptrdiff_t pstride = st.r.record_stride();
  const std::ptrdiff_t istride = interp.c.record_stride();
  // The vector lane needs contiguous particle and coefficient lanes and has
  // no tan(); fall back to scalar otherwise.
  const kernels::Kernels& kk =
      (pstride == 1 && istride == 1 && !exact_gyration)
          ? k
          : kernels::scalar_kernels();

  kernels::PushArgs base;
  base.dx = st.r.field_ptr(pv::dx);
  base.dy = st.r.field_ptr(pv::dy);
  base.dz = st.r.field_ptr(pv::dz);
  base.ux = st.r.field_ptr(pv::ux);
  base.uy = st.r.field_ptr(pv::uy);
  base.uz = st.r.field_ptr(pv::uz);
  base.pstride = pstride;
  for (int l = 0; l < iv::count; ++l)
    base.interp[l] = interp.c.field_ptr(static_cast<std::size_t>(l));
  base.istride = istride;
  base.cx = 2 * g.dt / g.hx;
  base.cy = 2 * g.dt / g.hy;
  base.cz = 2 * g.dt / g.hz;
  base.qdt_2m = sp.q * g.dt / (2 * sp.m);
  base.exact_gyration = exact_gyration;

  if (stage) stage->resize(n);
  const real_t* wlane = st.r.field_ptr(pv::w);
  const real_t qconst = sp.q;

  auto worker_fn = [&](int w, std::size_t begin, std::size_t end) {
    std::vector<real_t> scratch(3 * chunk_size);
    for (std::size_t c0 = begin; c0 < end; c0 += chunk_size) {
      const std::size_t cn = std::min(chunk_size, end - c0);
      kernels::PushArgs args = base;
      const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(c0) * pstride;
      args.dx = base.dx + off;
      args.dy = base.dy + off;
      args.dz = base.dz + off;
      args.ux = base.ux + off;
      args.uy = base.uy + off;
      args.uz = base.uz + off;
      args.ids = st.id.data() + c0;
      args.end_x = scratch.data();
      args.end_y = scratch.data() + chunk_size;
      args.end_z = scratch.data() + 2 * chunk_size;
      args.count = cn;
      kk.push_chunk(args);

      for (std::size_t i = 0; i < cn; ++i) {
        const std::size_t p = c0 + i;
        const std::ptrdiff_t po = static_cast<std::ptrdiff_t>(p) * pstride;
        const voxel_id v0 = st.id[p];
        const real_t s[3] = {base.dx[po], base.dy[po], base.dz[po]};
        const real_t e[3] = {args.end_x[i], args.end_y[i], args.end_z[i]};
        const real_t d[3] = {e[0] - s[0], e[1] - s[1], e[2] - s[2]};
        real_t qf[3];
        voxel_id vf;
        if (stage) {
          stage->v0[p] = v0;
          stage->sx[p] = s[0];
          stage->sy[p] = s[1];
          stage->sz[p] = s[2];
          stage->dx[p] = d[0];
          stage->dy[p] = d[1];
          stage->dz[p] = d[2];
          run_mover(
              g, v0, s, d, [](voxel_id, const real_t*, const real_t*) {}, qf,
              vf);
        } else {
          const real_t qw = qconst * wlane[po];
          run_mover(
              g, v0, s, d,
              [&](voxel_id v, const real_t* mid, const real_t* disp) {
                real_t wl[av::count];
                deposit_weights(mid, disp, qw, wl);
                sb.contribute_row(w, static_cast<std::size_t>(v), wl);
              },
              qf, vf);
        }
        base.dx[po] = qf[0];
        base.dy[po] = qf[1];
        base.dz[po] = qf[2];
        const Coords cc = coords_of(vf, g);
        const Coords wc = wrap_periodic(cc.ix, cc.iy, cc.iz, g);
        st.id[p] = voxel_of_unchecked(wc.ix, wc.iy, wc.iz, g);
      }
    }
  };

  if (pool && pool->worker_count() > 1) {
    pool->for_ranges(n, worker_fn);
  } else {
    worker_fn(0, 0, n);
  }
}

void replay_deposits(const Species& sp, const DepositStage& stage,
                     ScatterBuffer& sb, const GridDescriptor& g) {
  const std::size_t n = sp.store.size();
  const real_t* wlane = sp.store.r.field_ptr(pv::w);
  const std::ptrdiff_t pstride = sp.store.r.record_stride();
  for (std::size_t p = 0; p < n; ++p) {
    const real_t s[3] = {stage.sx[p], stage.sy[p], stage.sz[p]};
    const real_t d[3] = {stage.dx[p], stage.dy[p], stage.dz[p]};
    const real_t qw = sp.q * wlane[static_cast<std::ptrdiff_t>(p) * pstride];
    real_t qf[3];
    voxel_id vf;
    run_mover(
        g, stage.v0[p], s, d,
        [&](voxel_id v, const real_t* mid, const real_t* disp) {
          real_t wl[av::count];
          deposit_weights(mid, disp, qw, wl);
          sb.contribute_row(0, static_cast<std::size_t>(v), wl);
        },
        qf, vf);
  }
}

void deposit_rho(const Species& sp, FieldArray& fa, const GridDescriptor& g) {
  const ParticleStore& st = sp.store;
  const std::size_t n = st.size();
  const real_t scale = real_t(0.125) / g.cell_volume();
  FieldedBuffer& f = fa.f;
  for (std::size_t p = 0; p < n; ++p) {
    const real_t x = st.r(p, pv::dx);
    const real_t y = st.r(p, pv::dy);
    const real_t z = st.r(p, pv::dz);
    const real_t qw = sp.q * st.r(p, pv::w) * scale;
    const Coords c = coords_of(st.id[p], g);
    const int xh = c.ix + 1 > g.nx ? 1 : c.ix + 1;
    const int yh = c.iy + 1 > g.ny ? 1 : c.iy + 1;
    const int zh = c.iz + 1 > g.nz ? 1 : c.iz + 1;
    const real_t wxl = 1 - x, wxh = 1 + x;
    const real_t wyl = 1 - y, wyh = 1 + y;
    const real_t wzl = 1 - z, wzh = 1 + z;
    f(voxel_of_unchecked(c.ix, c.iy, c.iz, g), fv::rhof) += qw * (wxl * wyl * wzl);
    f(voxel_of_unchecked(xh, c.iy, c.iz, g), fv::rhof) += qw * (wxh * wyl * wzl);
    f(voxel_of_unchecked(c.ix, yh, c.iz, g), fv::rhof) += qw * (wxl * wyh * wzl);
    f(voxel_of_unchecked(xh, yh, c.iz, g), fv::rhof) += qw * (wxh * wyh * wzl);
    f(voxel_of_unchecked(c.ix, c.iy, zh, g), fv::rhof) += qw * (wxl * wyl * wzh);
    f(voxel_of_unchecked(xh, c.iy, zh, g), fv::rhof) += qw * (wxh * wyl * wzh);
    f(voxel_of_unchecked(c.ix, yh, zh, g), fv::rhof) += qw * (wxl * wyh * wzh);
    f(voxel_of_unchecked(xh, yh, zh, g), fv::rhof) += qw * (wxh * wyh * wzh);
  }
}

void sort_particles(Species& sp, SortOrder order) {
  ParticleStore& st = sp.store;
  const std::size_t n = st.size();
  if (n == 0) return;
  const voxel_id max_id =
      *std::max_element(st.id.begin(), st.id.end());
  const std::size_t buckets = static_cast<std::size_t>(max_id) + 1;

  // Stable counting sort by voxel id: perm[j] = old index of new slot j.
  std::vector<std::size_t> start(buckets + 1, 0);
  for (std::size_t p = 0; p < n; ++p) ++start[static_cast<std::size_t>(st.id[p]) + 1];
  for (std::size_t b = 1; b <= buckets; ++b) start[b] += start[b - 1];
  std::vector<std::size_t> cursor(start.begin(), start.end() - 1);
  std::vector<std::size_t> perm(n);
  std::vector<std::size_t> within(n);  // position within the voxel run
  for (std::size_t p = 0; p < n; ++p) {
    const auto b = static_cast<std::size_t>(st.id[p]);
    const std::size_t slot = cursor[b]++;
    perm[slot] = p;
    within[slot] = slot - start[b];
  }

  if (order == SortOrder::interleaved) {
    // Second stable counting sort of the blocked sequence by within-voxel
    // position: round k lists every voxel still holding a k-th particle, in
    // ascending voxel order.
    std::size_t max_k = 0;
    for (std::size_t j = 0; j < n; ++j) max_k = std::max(max_k, within[j]);
    std::vector<std::size_t> kstart(max_k + 2, 0);
    for (std::size_t j = 0; j < n; ++j) ++kstart[within[j] + 1];
    for (std::size_t b = 1; b <= max_k + 1; ++b) kstart[b] += kstart[b - 1];
    std::vector<std::size_t> perm2(n);
    for (std::size_t j = 0; j < n; ++j) perm2[kstart[within[j]]++] = perm[j];
    perm.swap(perm2);
  }

  // Apply the permutation to all lanes and ids through a scratch pass.
  std::vector<real_t> tmp(n);
  for (int lane = 0; lane < pv::count; ++lane) {
    const auto l = static_cast<std::size_t>(lane);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = st.r(perm[j], l);
    for (std::size_t j = 0; j < n; ++j) st.r(j, l) = tmp[j];
  }
  std::vector<voxel_id> tmpid(n);
  for (std::size_t j = 0; j < n; ++j) tmpid[j] = st.id[perm[j]];
  st.id.swap(tmpid);
}

real_t kinetic_energy(const Species& sp, const kernels::Kernels& k) {
  const ParticleStore& st = sp.store;
  if (st.size() == 0) return 0;
  return k.kinetic_sum(st.r.field_ptr(pv::ux), st.r.field_ptr(pv::uy),
                       st.r.field_ptr(pv::uz), st.r.field_ptr(pv::w),
                       st.r.record_stride(), sp.m, st.size());
}

real_t kinetic_energy_centered(const Species& sp,
                               const InterpolatorArray& interp,
                               const GridDescriptor& g) {
  const ParticleStore& st = sp.store;
  const std::size_t n = st.size();
  if (n == 0) return 0;
  const real_t* lanes[iv::count];
  for (int l = 0; l < iv::count; ++l)
    lanes[l] = interp.c.field_ptr(static_cast<std::size_t>(l));
  const std::ptrdiff_t istride = interp.c.record_stride();
  const std::ptrdiff_t s = st.r.record_stride();
  const real_t* dx = st.r.field_ptr(pv::dx);
  const real_t* dy = st.r.field_ptr(pv::dy);
  const real_t* dz = st.r.field_ptr(pv::dz);
  const real_t* ux = st.r.field_ptr(pv::ux);
  const real_t* uy = st.r.field_ptr(pv::uy);
  const real_t* uz = st.r.field_ptr(pv::uz);
  const real_t* w = st.r.field_ptr(pv::w);
  const real_t qdt_2m = sp.q * g.dt / (2 * sp.m);
  real_t p[simd_block] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const std::ptrdiff_t o = static_cast<std::ptrdiff_t>(i) * s;
    kernels::EB f;
    kernels::eval_eb_lanes(lanes, istride, st.id[i], dx[o], dy[o], dz[o], f);
    const real_t cx = ux[o] + qdt_2m * f.ex;
    const real_t cy = uy[o] + qdt_2m * f.ey;
    const real_t cz = uz[o] + qdt_2m * f.ez;
    const real_t gm = kernels::gamma_of(cx, cy, cz);
    p[i % simd_block] += (w[o] * sp.m) * (gm - real_t(1));
  }
  for (int h = simd_block / 2; h > 0; h >>= 1)
    for (int j = 0; j < h; ++j) p[j] += p[j + h];
  return p[0];
}

vec3 total_momentum(const Species& sp) {
  const ParticleStore& st = sp.store;
  vec3 s;
  for (std::size_t p = 0; p < st.size(); ++p) {
    const real_t wm = st.r(p, pv::w) * sp.m;
    s.x += wm * st.r(p, pv::ux);
    s.y += wm * st.r(p, pv::uy);
    s.z += wm * st.r(p, pv::uz);
  }
  return s;
}

}  // namespace minipic
