#pragma once

#include <cmath>
#include <span>

#include "minipic/types.hpp"

namespace minipic {

/// Uniform periodic lattice with one ghost layer per face.
///
/// Interior voxels have per-axis coordinates in [1, n]; coordinate 0 and
/// n + 1 are the periodic ghost planes. Units are normalized: c = 1,
/// vacuum permittivity and permeability = 1.
struct GridDescriptor {
  int nx = 0, ny = 0, nz = 0;          ///< interior voxel counts
  real_t hx = 1, hy = 1, hz = 1;       ///< cell spacings
  real_t dt = 0;                       ///< timestep

  int pnx() const { return nx + 2; }
  int pny() const { return ny + 2; }
  int pnz() const { return nz + 2; }
  std::size_t padded_voxels() const {
    return static_cast<std::size_t>(pnx()) * pny() * pnz();
  }
  std::size_t interior_voxels() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
  real_t lx() const { return hx * nx; }
  real_t ly() const { return hy * ny; }
  real_t lz() const { return hz * nz; }
  real_t cell_volume() const { return hx * hy * hz; }

  // Linear strides of the +x/+y/+z padded neighbors.
  voxel_id stride_x() const { return 1; }
  voxel_id stride_y() const { return pnx(); }
  voxel_id stride_z() const { return pnx() * pny(); }
};

struct Coords {
  int ix = 0, iy = 0, iz = 0;
};

/// Largest stable explicit timestep: 1 / sqrt(1/hx^2 + 1/hy^2 + 1/hz^2).
real_t cfl_limit(const GridDescriptor& g);

/// Validates counts, spacings and dt (0 < dt <= 0.99 * cfl_limit).
void validate_grid(const GridDescriptor& g);

/// Linear voxel id of padded coordinates; throws usage_error out of range.
voxel_id voxel_of(int ix, int iy, int iz, const GridDescriptor& g);

inline voxel_id voxel_of_unchecked(int ix, int iy, int iz,
                                   const GridDescriptor& g) {
  return static_cast<voxel_id>(ix + g.pnx() * (iy + g.pny() * iz));
}

/// Exact inverse of voxel_of on the padded lattice.
Coords coords_of(voxel_id v, const GridDescriptor& g);

/// Maps coordinates at most one cell outside the interior back into [1, n]
/// per axis. Throws run_abort for displacements beyond one cell, which can
/// only happen when the CFL bound was violated.
Coords wrap_periodic(int ix, int iy, int iz, const GridDescriptor& g);

/// True for coordinates in the interior range on every axis.
bool is_interior(const Coords& c, const GridDescriptor& g);

/// Adds every ghost slot's accumulation lanes onto its periodic interior
/// image and zeroes the ghost entry. dense holds num_lanes values per padded
/// voxel. The fold is a fixed-order permutation of additions (x, then y,
/// then z planes), so the per-lane totals are preserved.
void ghost_fold_currents(std::span<real_t> dense, std::size_t num_lanes,
                         const GridDescriptor& g);

}  // namespace minipic
