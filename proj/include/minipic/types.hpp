#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace minipic {

// Real type is selected at build time. Single precision is the traditional
// choice for production PIC runs; double is the default here so the strict
// conservation diagnostics run at their tightest tolerances.
#ifdef MINIPIC_SINGLE_PRECISION
using real_t = float;
#else
using real_t = double;
#endif

/// Linear index of a voxel on the ghost-padded lattice.
using voxel_id = std::int32_t;

/// Lane count used by blocked reductions. Matches the widest SIMD kernel so
/// scalar and vector reductions produce bit-identical partial sums.
inline constexpr int simd_block = (sizeof(real_t) == 4) ? 8 : 4;

/// Caller violated a documented precondition (bad index, shape mismatch, ...).
class usage_error : public std::logic_error {
public:
  explicit usage_error(const std::string& what) : std::logic_error(what) {}
};

/// The simulation cannot continue (CFL violation, failing hook, I/O error).
class run_abort : public std::runtime_error {
public:
  explicit run_abort(const std::string& what) : std::runtime_error(what) {}
};

struct vec3 {
  real_t x = 0, y = 0, z = 0;
};

}  // namespace minipic
