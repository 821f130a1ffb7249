#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "minipic/grid.hpp"
#include "minipic/kernels/dispatch.hpp"
#include "minipic/lanes.hpp"
#include "minipic/layout.hpp"
#include "minipic/thread_pool.hpp"

namespace minipic {

/// Yee-staggered field state: one 16-lane real record per padded voxel plus
/// 8 reserved material ids. ex lives on x edges at (i+1/2, j, k), cbx on x
/// faces at (i, j+1/2, k+1/2), rhof on nodes (i, j, k); cyclic for y/z.
/// tcax/tcay/tcaz/rhob and the material ids are carried for record-shape
/// fidelity and stay exactly zero.
struct FieldArray {
  FieldedBuffer f;
  std::vector<std::int16_t> material;

  FieldArray(const GridDescriptor& g, Layout layout, SpaceTag space = {});
  FieldArray(FieldedBuffer buf, std::vector<std::int16_t> mat)
      : f(std::move(buf)), material(std::move(mat)) {}

  /// Mirror in another space; aliases when the labels match.
  FieldArray mirror_in(SpaceTag target) const;

  real_t& at(voxel_id v, int lane) {
    return f(static_cast<std::size_t>(v), static_cast<std::size_t>(lane));
  }
  real_t at(voxel_id v, int lane) const {
    return f(static_cast<std::size_t>(v), static_cast<std::size_t>(lane));
  }
};

/// Copies each interior boundary plane of E and B into the opposing ghost
/// plane (periodic images), x then y then z so edge and corner ghosts end up
/// consistent.
void ghost_sync_fields(FieldArray& fa, const GridDescriptor& g);

/// B -= frac * dt * curl E on interior faces, centered Yee differences.
void advance_b(FieldArray& fa, const GridDescriptor& g, real_t frac,
               const kernels::Kernels& k, ThreadPool* pool = nullptr);

/// E += dt * (curl B - J) on interior edges.
void advance_e(FieldArray& fa, const GridDescriptor& g,
               const kernels::Kernels& k, ThreadPool* pool = nullptr);

/// Zeroes the free-current lanes (all padded voxels).
void clear_currents(FieldArray& fa);

/// Zeroes the charge-density lane.
void clear_rho(FieldArray& fa);

/// Adds the reduced 12-lane accumulations onto the owning edges' jf entries,
/// scaled by h_a / (2 dt hx hy hz) per direction; edge targets that fall in
/// a ghost plane wrap to their periodic interior image. Ghost slots must
/// already be folded.
void unload_currents(std::span<const real_t> reduced, std::size_t num_lanes,
                     FieldArray& fa, const GridDescriptor& g);

/// div_e_err(node) = node divergence of E minus rhof; div_b_err(cell) =
/// cell-centered divergence of B. Interior entries only.
void compute_div_errors(FieldArray& fa, const GridDescriptor& g);

struct FieldEnergy {
  real_t e = 0;
  real_t b = 0;
};

/// (1/2) sum of E^2 (resp. B^2) times cell volume over interior entries.
FieldEnergy field_energy(const FieldArray& fa, const GridDescriptor& g,
                         const kernels::Kernels& k);

/// Max interior |lane| value.
real_t max_abs_lane(const FieldArray& fa, const GridDescriptor& g, int lane);

enum class DumpFormat { binary, csv };

/// Writes interior field records in voxel order, preceded by a text header
/// line "nx ny nz float32|float64". Binary payload is little-endian reals.
void dump_fields(const FieldArray& fa, const GridDescriptor& g,
                 const std::filesystem::path& path, DumpFormat format);

}  // namespace minipic
