#pragma once

#include <string>
#include <vector>

#include "minipic/fields.hpp"
#include "minipic/grid.hpp"
#include "minipic/kernels/dispatch.hpp"
#include "minipic/layout.hpp"
#include "minipic/thread_pool.hpp"
#include "minipic/types.hpp"

namespace minipic {

/// Quasiparticle storage: a layout-polymorphic 7-lane real buffer (offsets,
/// momentum, weight) plus a separate voxel-index buffer, always record
/// ordered.
struct ParticleStore {
  FieldedBuffer r;
  std::vector<voxel_id> id;

  ParticleStore(std::size_t count, Layout layout, SpaceTag space = {})
      : r(count, particle_var::count, layout, std::move(space)),
        id(count, 0) {}

  std::size_t size() const { return id.size(); }

  ParticleStore mirror_in(SpaceTag target) const {
    return {r.mirror(std::move(target)), id};
  }
  ParticleStore(FieldedBuffer buf, std::vector<voxel_id> ids)
      : r(std::move(buf)), id(std::move(ids)) {}
};

enum class SortOrder { blocked, interleaved };
const char* to_string(SortOrder o);

struct Species {
  std::string name;
  real_t q = 0;
  real_t m = 1;
  int sort_interval = 0;  ///< steps between sorts; 0 = never
  SortOrder sort_order = SortOrder::blocked;
  ParticleStore store;
};

/// 18 reconstruction coefficients per padded voxel; rebuilt from the field
/// state every step before pushing.
struct InterpolatorArray {
  FieldedBuffer c;
  InterpolatorArray(const GridDescriptor& g, Layout layout)
      : c(g.padded_voxels(), interp_var::count, layout) {}
};

/// B-spline particle shapes of order 0..2. Order 0 is the top hat (value 1
/// at xi = -1/2, 0 at xi = +1/2 by the half-open convention), order 1 the
/// triangle, order 2 the piecewise quadratic.
real_t bspline(int order, real_t xi);

/// Fills coefficients for interior voxels from staggered E and B averages;
/// ghost voxels are zeroed. Ghosts of fa must be synced.
void load_interpolators(const FieldArray& fa, const GridDescriptor& g,
                        InterpolatorArray& out, ThreadPool* pool = nullptr);

/// Reconstructed fields at offsets within voxel v.
void eval_eb(const InterpolatorArray& interp, voxel_id v, real_t dx, real_t dy,
             real_t dz, vec3& e_out, vec3& b_out);

/// One Boris momentum update.
vec3 boris_kick(const vec3& u, const vec3& e, const vec3& b, real_t q,
                real_t m, real_t dt, bool exact_gyration = false);

/// Charge-conserving current contribution of one in-cell segment with
/// midpoint mid and displacement disp (offset units) to the voxel's 12
/// accumulator lanes. The segment must not span a cell face.
void deposit_segment(voxel_id voxel, const real_t mid[3], const real_t disp[3],
                     real_t qw, ScatterBuffer& sb, int worker);

/// Staging area for the deterministic deposition path: the parallel push
/// records each particle's start voxel/offsets and full displacement, and a
/// serial replay deposits them in ascending particle order. The resulting
/// sums are independent of worker count and chunk size, bit for bit.
struct DepositStage {
  std::vector<voxel_id> v0;
  std::vector<real_t> sx, sy, sz;
  std::vector<real_t> dx, dy, dz;
  void resize(std::size_t n);
};

/// Advances every particle one step: half-move, field evaluation (in the
/// entered voxel when the half-move crosses a face), Boris kick, half-move,
/// then charge-conserving deposition of the full displacement split at face
/// crossings. Work is dispatched over chunks of chunk_size within each
/// worker's contiguous range. With stage != nullptr deposits are staged
/// instead of scattered (deterministic mode).
void advance_particles(Species& sp, const InterpolatorArray& interp,
                       ScatterBuffer& sb, const GridDescriptor& g,
                       std::size_t chunk_size, const kernels::Kernels& k,
                       ThreadPool* pool = nullptr,
                       bool exact_gyration = false,
                       DepositStage* stage = nullptr);

/// Serial ordered replay of staged deposits (all through worker 0).
void replay_deposits(const Species& sp, const DepositStage& stage,
                     ScatterBuffer& sb, const GridDescriptor& g);

/// Trilinear (order-1 tensor shape) charge deposition onto the 8 nodes
/// around each particle; node targets wrap periodically.
void deposit_rho(const Species& sp, FieldArray& fa, const GridDescriptor& g);

/// Reorders particles by voxel id. blocked: stable counting sort, all
/// particles of a voxel contiguous. interleaved: round-robin over occupied
/// voxels, position k of voxel rank r landing at slot k * (occupied count)
/// + r while occupancy stays balanced. The particle multiset is preserved
/// exactly.
void sort_particles(Species& sp, SortOrder order);

/// Sum of w * m * (gamma - 1) over the store.
real_t kinetic_energy(const Species& sp, const kernels::Kernels& k);

/// Kinetic energy with the stored momenta recentered onto the field time
/// level by half an E kick (the magnetic rotation cannot change |u|, so it
/// is skipped). Used for energy diagnostics, where the staggered momentum
/// would otherwise alias an O(omega dt) sloshing onto the total.
real_t kinetic_energy_centered(const Species& sp,
                               const InterpolatorArray& interp,
                               const GridDescriptor& g);

/// Total momentum sum w * m * u (diagnostic).
vec3 total_momentum(const Species& sp);

}  // namespace minipic
