#include "minipic/fields.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace minipic {

namespace fv = field_var;

FieldArray::FieldArray(const GridDescriptor& g, Layout layout, SpaceTag space)
    : f(g.padded_voxels(), fv::count, layout, std::move(space)),
      material(g.padded_voxels() * 8, 0) {}

FieldArray FieldArray::mirror_in(SpaceTag target) const {
  return FieldArray(f.mirror(std::move(target)), material);
}

namespace {

// Copies lane values from one voxel to another for the six field components.
inline void copy_ghost(FieldedBuffer& f, voxel_id to, voxel_id from) {
  static constexpr int lanes[6] = {fv::ex, fv::ey,  fv::ez,
                                   fv::cbx, fv::cby, fv::cbz};
  const auto t = static_cast<std::size_t>(to);
  const auto s = static_cast<std::size_t>(from);
  for (int lane : lanes) {
    const auto l = static_cast<std::size_t>(lane);
    f(t, l) = f(s, l);
  }
}

}  // namespace

void ghost_sync_fields(FieldArray& fa, const GridDescriptor& g) {
  FieldedBuffer& f = fa.f;
  for (int iz = 0; iz < g.pnz(); ++iz)
    for (int iy = 0; iy < g.pny(); ++iy) {
      copy_ghost(f, voxel_of_unchecked(0, iy, iz, g),
                 voxel_of_unchecked(g.nx, iy, iz, g));
      copy_ghost(f, voxel_of_unchecked(g.nx + 1, iy, iz, g),
                 voxel_of_unchecked(1, iy, iz, g));
    }
  for (int iz = 0; iz < g.pnz(); ++iz)
    for (int ix = 0; ix < g.pnx(); ++ix) {
      copy_ghost(f, voxel_of_unchecked(ix, 0, iz, g),
                 voxel_of_unchecked(ix, g.ny, iz, g));
      copy_ghost(f, voxel_of_unchecked(ix, g.ny + 1, iz, g),
                 voxel_of_unchecked(ix, 1, iz, g));
    }
  for (int iy = 0; iy < g.pny(); ++iy)
    for (int ix = 0; ix < g.pnx(); ++ix) {
      copy_ghost(f, voxel_of_unchecked(ix, iy, 0, g),
                 voxel_of_unchecked(ix, iy, g.nz, g));
      copy_ghost(f, voxel_of_unchecked(ix, iy, g.nz + 1, g),
                 voxel_of_unchecked(ix, iy, 1, g));
    }
}

namespace {

struct LaneView {
  real_t* base;
  std::ptrdiff_t stride;
  real_t* at(voxel_id v) const { return base + static_cast<std::ptrdiff_t>(v) * stride; }
};

inline LaneView lane_view(FieldedBuffer& f, int lane) {
  return {f.field_ptr(static_cast<std::size_t>(lane)), f.record_stride()};
}

// Runs fn(iy, iz) over interior (iy, iz) pairs, parallel over z slabs.
template <class Fn>
void over_interior_lines(const GridDescriptor& g, ThreadPool* pool, Fn&& fn) {
  if (pool && pool->worker_count() > 1) {
    pool->for_ranges(static_cast<std::size_t>(g.nz),
                     [&](int, std::size_t zb, std::size_t ze) {
                       for (std::size_t z = zb; z < ze; ++z)
                         for (int iy = 1; iy <= g.ny; ++iy)
                           fn(iy, static_cast<int>(z) + 1);
                     });
  } else {
    for (int iz = 1; iz <= g.nz; ++iz)
      for (int iy = 1; iy <= g.ny; ++iy) fn(iy, iz);
  }
}

// Generic strided fallback with the same per-element expression as the
// contiguous kernels.
inline void curl_line_strided(LaneView dst, LaneView p1, LaneView p0, real_t c1,
                              LaneView q1, LaneView q0, real_t c2, voxel_id v0,
                              int n) {
  for (int i = 0; i < n; ++i) {
    const voxel_id v = v0 + i;
    *dst.at(v) = (*dst.at(v) + c1 * (*p1.at(v) - *p0.at(v))) +
                 c2 * (*q1.at(v) - *q0.at(v));
  }
}

inline void curl_line_j_strided(LaneView dst, LaneView p1, LaneView p0,
                                real_t c1, LaneView q1, LaneView q0, real_t c2,
                                LaneView r, real_t c3, voxel_id v0, int n) {
  for (int i = 0; i < n; ++i) {
    const voxel_id v = v0 + i;
    *dst.at(v) = ((*dst.at(v) + c1 * (*p1.at(v) - *p0.at(v))) +
                  c2 * (*q1.at(v) - *q0.at(v))) +
                 c3 * (*r.at(v));
  }
}

}  // namespace

void advance_b(FieldArray& fa, const GridDescriptor& g, real_t frac,
               const kernels::Kernels& k, ThreadPool* pool) {
  FieldedBuffer& f = fa.f;
  const real_t fdt = frac * g.dt;
  const real_t rhx = real_t(1) / g.hx;
  const real_t rhy = real_t(1) / g.hy;
  const real_t rhz = real_t(1) / g.hz;
  const voxel_id sx = g.stride_x(), sy = g.stride_y(), sz = g.stride_z();
  const bool contiguous = f.record_stride() == 1;

  const LaneView ex = lane_view(f, fv::ex), ey = lane_view(f, fv::ey),
                 ez = lane_view(f, fv::ez);
  const LaneView bx = lane_view(f, fv::cbx), by = lane_view(f, fv::cby),
                 bz = lane_view(f, fv::cbz);

  over_interior_lines(g, pool, [&](int iy, int iz) {
    const voxel_id v0 = voxel_of_unchecked(1, iy, iz, g);
    const int n = g.nx;
    if (contiguous) {
      // (curl E)_x = d(ez)/dy - d(ey)/dz, etc.
      k.curl_line(bx.at(v0), ez.at(v0 + sy), ez.at(v0), -fdt * rhy,
                  ey.at(v0 + sz), ey.at(v0), fdt * rhz, n);
      k.curl_line(by.at(v0), ex.at(v0 + sz), ex.at(v0), -fdt * rhz,
                  ez.at(v0 + sx), ez.at(v0), fdt * rhx, n);
      k.curl_line(bz.at(v0), ey.at(v0 + sx), ey.at(v0), -fdt * rhx,
                  ex.at(v0 + sy), ex.at(v0), fdt * rhy, n);
    } else {
      curl_line_strided(bx, {ez.base + sy * ez.stride, ez.stride}, ez,
                        -fdt * rhy, {ey.base + sz * ey.stride, ey.stride}, ey,
                        fdt * rhz, v0, n);
      curl_line_strided(by, {ex.base + sz * ex.stride, ex.stride}, ex,
                        -fdt * rhz, {ez.base + sx * ez.stride, ez.stride}, ez,
                        fdt * rhx, v0, n);
      curl_line_strided(bz, {ey.base + sx * ey.stride, ey.stride}, ey,
                        -fdt * rhx, {ex.base + sy * ex.stride, ex.stride}, ex,
                        fdt * rhy, v0, n);
    }
  });
}

void advance_e(FieldArray& fa, const GridDescriptor& g,
               const kernels::Kernels& k, ThreadPool* pool) {
  FieldedBuffer& f = fa.f;
  const real_t dt = g.dt;
  const real_t rhx = real_t(1) / g.hx;
  const real_t rhy = real_t(1) / g.hy;
  const real_t rhz = real_t(1) / g.hz;
  const voxel_id sx = g.stride_x(), sy = g.stride_y(), sz = g.stride_z();
  const bool contiguous = f.record_stride() == 1;

  const LaneView ex = lane_view(f, fv::ex), ey = lane_view(f, fv::ey),
                 ez = lane_view(f, fv::ez);
  const LaneView bx = lane_view(f, fv::cbx), by = lane_view(f, fv::cby),
                 bz = lane_view(f, fv::cbz);
  const LaneView jx = lane_view(f, fv::jfx), jy = lane_view(f, fv::jfy),
                 jz = lane_view(f, fv::jfz);

  over_interior_lines(g, pool, [&](int iy, int iz) {
    const voxel_id v0 = voxel_of_unchecked(1, iy, iz, g);
    const int n = g.nx;
    if (contiguous) {
      // (curl B)_x = d(cbz)/dy - d(cby)/dz at the edge, backward differences.
      k.curl_line_j(ex.at(v0), bz.at(v0), bz.at(v0 - sy), dt * rhy, by.at(v0),
                    by.at(v0 - sz), -dt * rhz, jx.at(v0), -dt, n);
      k.curl_line_j(ey.at(v0), bx.at(v0), bx.at(v0 - sz), dt * rhz, bz.at(v0),
                    bz.at(v0 - sx), -dt * rhx, jy.at(v0), -dt, n);
      k.curl_line_j(ez.at(v0), by.at(v0), by.at(v0 - sx), dt * rhx, bx.at(v0),
                    bx.at(v0 - sy), -dt * rhy, jz.at(v0), -dt, n);
    } else {
      curl_line_j_strided(ex, bz, {bz.base - sy * bz.stride, bz.stride},
                          dt * rhy, by, {by.base - sz * by.stride, by.stride},
                          -dt * rhz, jx, -dt, v0, n);
      curl_line_j_strided(ey, bx, {bx.base - sz * bx.stride, bx.stride},
                          dt * rhz, bz, {bz.base - sx * bz.stride, bz.stride},
                          -dt * rhx, jy, -dt, v0, n);
      curl_line_j_strided(ez, by, {by.base - sx * by.stride, by.stride},
                          dt * rhx, bx, {bx.base - sy * bx.stride, bx.stride},
                          -dt * rhy, jz, -dt, v0, n);
    }
  });
}

void clear_currents(FieldArray& fa) {
  FieldedBuffer& f = fa.f;
  const std::size_t n = f.num_records();
  for (int lane : {fv::jfx, fv::jfy, fv::jfz})
    for (std::size_t v = 0; v < n; ++v)
      f(v, static_cast<std::size_t>(lane)) = 0;
}

void clear_rho(FieldArray& fa) {
  FieldedBuffer& f = fa.f;
  for (std::size_t v = 0; v < f.num_records(); ++v) f(v, fv::rhof) = 0;
}

void unload_currents(std::span<const real_t> reduced, std::size_t num_lanes,
                     FieldArray& fa, const GridDescriptor& g) {
  if (num_lanes != accum_var::count)
    throw usage_error("unload_currents: expected 12 accumulator lanes, got " +
                      std::to_string(num_lanes));
  if (reduced.size() != g.padded_voxels() * num_lanes)
    throw usage_error("unload_currents: reduced array has wrong size");

  const real_t two_dt_v = 2 * g.dt * (g.hx * g.hy * g.hz);
  const real_t fx = g.hx / two_dt_v;
  const real_t fy = g.hy / two_dt_v;
  const real_t fz = g.hz / two_dt_v;

  // High edge targets can land in a ghost plane; those wrap to the periodic
  // interior edge they alias.
  const auto wrap_hi = [](int i, int n) { return i > n ? 1 : i; };

  FieldedBuffer& f = fa.f;
  for (int iz = 1; iz <= g.nz; ++iz)
    for (int iy = 1; iy <= g.ny; ++iy)
      for (int ix = 1; ix <= g.nx; ++ix) {
        const std::size_t slot =
            static_cast<std::size_t>(voxel_of_unchecked(ix, iy, iz, g));
        const real_t* lanes = reduced.data() + slot * num_lanes;
        const int yhi = wrap_hi(iy + 1, g.ny);
        const int zhi = wrap_hi(iz + 1, g.nz);
        const int xhi = wrap_hi(ix + 1, g.nx);

        f(voxel_of_unchecked(ix, iy, iz, g), fv::jfx) += fx * lanes[accum_var::jx0];
        f(voxel_of_unchecked(ix, yhi, iz, g), fv::jfx) += fx * lanes[accum_var::jx1];
        f(voxel_of_unchecked(ix, iy, zhi, g), fv::jfx) += fx * lanes[accum_var::jx2];
        f(voxel_of_unchecked(ix, yhi, zhi, g), fv::jfx) += fx * lanes[accum_var::jx3];

        f(voxel_of_unchecked(ix, iy, iz, g), fv::jfy) += fy * lanes[accum_var::jy0];
        f(voxel_of_unchecked(ix, iy, zhi, g), fv::jfy) += fy * lanes[accum_var::jy1];
        f(voxel_of_unchecked(xhi, iy, iz, g), fv::jfy) += fy * lanes[accum_var::jy2];
        f(voxel_of_unchecked(xhi, iy, zhi, g), fv::jfy) += fy * lanes[accum_var::jy3];

        f(voxel_of_unchecked(ix, iy, iz, g), fv::jfz) += fz * lanes[accum_var::jz0];
        f(voxel_of_unchecked(xhi, iy, iz, g), fv::jfz) += fz * lanes[accum_var::jz1];
        f(voxel_of_unchecked(ix, yhi, iz, g), fv::jfz) += fz * lanes[accum_var::jz2];
        f(voxel_of_unchecked(xhi, yhi, iz, g), fv::jfz) += fz * lanes[accum_var::jz3];
      }
}

void compute_div_errors(FieldArray& fa, const GridDescriptor& g) {
  FieldedBuffer& f = fa.f;
  const real_t rhx = real_t(1) / g.hx;
  const real_t rhy = real_t(1) / g.hy;
  const real_t rhz = real_t(1) / g.hz;
  const voxel_id sx = g.stride_x(), sy = g.stride_y(), sz = g.stride_z();
  for (int iz = 1; iz <= g.nz; ++iz)
    for (int iy = 1; iy <= g.ny; ++iy)
      for (int ix = 1; ix <= g.nx; ++ix) {
        const voxel_id v = voxel_of_unchecked(ix, iy, iz, g);
        const auto sv = static_cast<std::size_t>(v);
        const real_t dive =
            ((f(sv, fv::ex) - f(sv - sx, fv::ex)) * rhx +
             (f(sv, fv::ey) - f(sv - sy, fv::ey)) * rhy) +
            (f(sv, fv::ez) - f(sv - sz, fv::ez)) * rhz;
        f(sv, fv::div_e_err) = dive - f(sv, fv::rhof);
        f(sv, fv::div_b_err) =
            ((f(sv + sx, fv::cbx) - f(sv, fv::cbx)) * rhx +
             (f(sv + sy, fv::cby) - f(sv, fv::cby)) * rhy) +
            (f(sv + sz, fv::cbz) - f(sv, fv::cbz)) * rhz;
      }
}

FieldEnergy field_energy(const FieldArray& fa, const GridDescriptor& g,
                         const kernels::Kernels& k) {
  const FieldedBuffer& f = fa.f;
  const std::ptrdiff_t stride = f.record_stride();
  real_t se = 0, sb = 0;
  for (int lane : {fv::ex, fv::ey, fv::ez})
    for (int iz = 1; iz <= g.nz; ++iz)
      for (int iy = 1; iy <= g.ny; ++iy) {
        const voxel_id v0 = voxel_of_unchecked(1, iy, iz, g);
        se += k.sum_squares(
            f.field_ptr(static_cast<std::size_t>(lane)) + v0 * stride, stride,
            static_cast<std::size_t>(g.nx));
      }
  for (int lane : {fv::cbx, fv::cby, fv::cbz})
    for (int iz = 1; iz <= g.nz; ++iz)
      for (int iy = 1; iy <= g.ny; ++iy) {
        const voxel_id v0 = voxel_of_unchecked(1, iy, iz, g);
        sb += k.sum_squares(
            f.field_ptr(static_cast<std::size_t>(lane)) + v0 * stride, stride,
            static_cast<std::size_t>(g.nx));
      }
  const real_t hv = real_t(0.5) * g.cell_volume();
  return {hv * se, hv * sb};
}

real_t max_abs_lane(const FieldArray& fa, const GridDescriptor& g, int lane) {
  const FieldedBuffer& f = fa.f;
  real_t m = 0;
  for (int iz = 1; iz <= g.nz; ++iz)
    for (int iy = 1; iy <= g.ny; ++iy)
      for (int ix = 1; ix <= g.nx; ++ix) {
        const real_t v = std::fabs(f(
            static_cast<std::size_t>(voxel_of_unchecked(ix, iy, iz, g)),
            static_cast<std::size_t>(lane)));
        if (v > m) m = v;
      }
  return m;
}

void dump_fields(const FieldArray& fa, const GridDescriptor& g,
                 const std::filesystem::path& path, DumpFormat format) {
  std::ofstream out(path, format == DumpFormat::binary
                              ? std::ios::binary | std::ios::out
                              : std::ios::out);
  if (!out) throw run_abort("dump_fields: cannot open " + path.string());
  const char* prec = sizeof(real_t) == 4 ? "float32" : "float64";
  out << g.nx << ' ' << g.ny << ' ' << g.nz << ' ' << prec << '\n';
  char buf[64];
  for (int iz = 1; iz <= g.nz; ++iz)
    for (int iy = 1; iy <= g.ny; ++iy)
      for (int ix = 1; ix <= g.nx; ++ix) {
        const auto v =
            static_cast<std::size_t>(voxel_of_unchecked(ix, iy, iz, g));
        if (format == DumpFormat::binary) {
          real_t rec[fv::count];
          for (int l = 0; l < fv::count; ++l)
            rec[l] = fa.f(v, static_cast<std::size_t>(l));
          out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
        } else {
          for (int l = 0; l < fv::count; ++l) {
            std::snprintf(buf, sizeof buf, "%.*g",
                          sizeof(real_t) == 4 ? 9 : 17,
                          static_cast<double>(fa.f(v, static_cast<std::size_t>(l))));
            out << buf << (l + 1 == fv::count ? '\n' : ',');
          }
        }
      }
  if (!out) throw run_abort("dump_fields: write failed for " + path.string());
}

}  // namespace minipic
