#include "minipic/grid.hpp"

#include <string>

namespace minipic {

real_t cfl_limit(const GridDescriptor& g) {
  const real_t s = real_t(1) / (g.hx * g.hx) + real_t(1) / (g.hy * g.hy) +
                   real_t(1) / (g.hz * g.hz);
  return real_t(1) / std::sqrt(s);
}

void validate_grid(const GridDescriptor& g) {
  if (g.nx < 2 || g.ny < 2 || g.nz < 2)
    throw usage_error("grid: interior counts must be >= 2");
  if (!(g.hx > 0) || !(g.hy > 0) || !(g.hz > 0))
    throw usage_error("grid: spacings must be positive");
  if (!(g.dt > 0) || g.dt > real_t(0.99) * cfl_limit(g))
    throw usage_error("grid: dt must satisfy 0 < dt <= 0.99 * cfl_limit");
}

voxel_id voxel_of(int ix, int iy, int iz, const GridDescriptor& g) {
  if (ix < 0 || ix >= g.pnx() || iy < 0 || iy >= g.pny() || iz < 0 ||
      iz >= g.pnz()) {
    throw usage_error("voxel_of: coordinates (" + std::to_string(ix) + ", " +
                      std::to_string(iy) + ", " + std::to_string(iz) +
                      ") outside padded lattice");
  }
  return voxel_of_unchecked(ix, iy, iz, g);
}

Coords coords_of(voxel_id v, const GridDescriptor& g) {
  if (v < 0 || static_cast<std::size_t>(v) >= g.padded_voxels())
    throw usage_error("coords_of: voxel id out of range");
  const int ix = static_cast<int>(v % g.pnx());
  const int rest = static_cast<int>(v / g.pnx());
  return {ix, rest % g.pny(), rest / g.pny()};
}

namespace {
int wrap_axis(int i, int n) {
  if (i < 0 || i > n + 1)
    throw run_abort("wrap_periodic: displacement beyond one cell (CFL violation)");
  if (i == 0) return n;
  if (i == n + 1) return 1;
  return i;
}
}  // namespace

Coords wrap_periodic(int ix, int iy, int iz, const GridDescriptor& g) {
  return {wrap_axis(ix, g.nx), wrap_axis(iy, g.ny), wrap_axis(iz, g.nz)};
}

bool is_interior(const Coords& c, const GridDescriptor& g) {
  return c.ix >= 1 && c.ix <= g.nx && c.iy >= 1 && c.iy <= g.ny && c.iz >= 1 &&
         c.iz <= g.nz;
}

namespace {

// Adds the lanes of voxel (fx, fy, fz) onto voxel (tx, ty, tz), then zeroes
// the source.
inline void fold_slot(std::span<real_t> dense, std::size_t lanes,
                      const GridDescriptor& g, int fx, int fy, int fz, int tx,
                      int ty, int tz) {
  const std::size_t from =
      static_cast<std::size_t>(voxel_of_unchecked(fx, fy, fz, g)) * lanes;
  const std::size_t to =
      static_cast<std::size_t>(voxel_of_unchecked(tx, ty, tz, g)) * lanes;
  for (std::size_t l = 0; l < lanes; ++l) {
    dense[to + l] += dense[from + l];
    dense[from + l] = 0;
  }
}

}  // namespace

void ghost_fold_currents(std::span<real_t> dense, std::size_t num_lanes,
                         const GridDescriptor& g) {
  if (dense.size() != g.padded_voxels() * num_lanes)
    throw usage_error("ghost_fold_currents: dense span has wrong size");
  // x planes first (full y/z extent including ghosts), then y, then z, so
  // edge and corner ghosts funnel into the interior after the last pass.
  for (int iz = 0; iz < g.pnz(); ++iz)
    for (int iy = 0; iy < g.pny(); ++iy) {
      fold_slot(dense, num_lanes, g, 0, iy, iz, g.nx, iy, iz);
      fold_slot(dense, num_lanes, g, g.nx + 1, iy, iz, 1, iy, iz);
    }
  for (int iz = 0; iz < g.pnz(); ++iz)
    for (int ix = 1; ix <= g.nx; ++ix) {
      fold_slot(dense, num_lanes, g, ix, 0, iz, ix, g.ny, iz);
      fold_slot(dense, num_lanes, g, ix, g.ny + 1, iz, ix, 1, iz);
    }
  for (int iy = 1; iy <= g.ny; ++iy)
    for (int ix = 1; ix <= g.nx; ++ix) {
      fold_slot(dense, num_lanes, g, ix, iy, 0, ix, iy, g.nz);
      fold_slot(dense, num_lanes, g, ix, iy, g.nz + 1, ix, iy, 1);
    }
}

}  // namespace minipic
