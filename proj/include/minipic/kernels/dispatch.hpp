#pragma once

#include <cstddef>

#include "minipic/lanes.hpp"
#include "minipic/types.hpp"

namespace minipic::kernels {

/// Kernel implementation lanes. Scalar is the reference; avx2 is selected at
/// runtime where available and is bit-identical to scalar per element (the
/// vector code mirrors the scalar operation sequence and uses no fused or
/// approximate instructions).
enum class Arch { scalar, avx2 };

const char* to_string(Arch a);

/// Best architecture supported by the executing CPU.
Arch detect_arch();
bool avx2_available();

/// Arguments for the chunked particle center update (field evaluation at
/// the stored position, momentum kick, full move). Lane pointers address
/// element i at ptr[i * pstride]; the vector kernel requires pstride == 1
/// and istride == 1 (field-major storage).
struct PushArgs {
  real_t* dx = nullptr;
  real_t* dy = nullptr;
  real_t* dz = nullptr;
  real_t* ux = nullptr;
  real_t* uy = nullptr;
  real_t* uz = nullptr;
  const voxel_id* ids = nullptr;
  std::ptrdiff_t pstride = 1;
  std::size_t count = 0;

  const real_t* interp[interp_var::count] = {};
  std::ptrdiff_t istride = 1;

  // Unwrapped end-of-step offsets, relative to the starting voxel frame.
  real_t* end_x = nullptr;
  real_t* end_y = nullptr;
  real_t* end_z = nullptr;

  real_t cx = 0, cy = 0, cz = 0;  ///< 2*dt/h_a: offset shift per unit velocity per step
  real_t qdt_2m = 0;
  bool exact_gyration = false;
};

struct Kernels {
  Arch arch;

  /// Updates momenta in place and writes unwrapped end offsets. Positions
  /// and voxel ids are left to the mover.
  void (*push_chunk)(const PushArgs&);

  /// dst[i] += c1*(p1[i]-p0[i]) + c2*(q1[i]-q0[i]) over a contiguous run.
  void (*curl_line)(real_t* dst, const real_t* p1, const real_t* p0, real_t c1,
                    const real_t* q1, const real_t* q0, real_t c2,
                    std::size_t n);

  /// curl_line plus the current term c3*r[i].
  void (*curl_line_j)(real_t* dst, const real_t* p1, const real_t* p0,
                      real_t c1, const real_t* q1, const real_t* q0, real_t c2,
                      const real_t* r, real_t c3, std::size_t n);

  /// Sum of squares with simd_block interleaved partials and a fixed pairwise
  /// collapse; the result is independent of the implementation lane.
  real_t (*sum_squares)(const real_t* x, std::ptrdiff_t stride, std::size_t n);

  /// Sum of (w*m)*(gamma - 1) with the same blocked accumulation scheme.
  real_t (*kinetic_sum)(const real_t* ux, const real_t* uy, const real_t* uz,
                        const real_t* w, std::ptrdiff_t stride, real_t m,
                        std::size_t n);
};

const Kernels& scalar_kernels();
const Kernels& kernels_for(Arch a);

}  // namespace minipic::kernels
