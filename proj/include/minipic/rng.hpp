#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "minipic/types.hpp"

namespace minipic {

/// Seeded pseudorandom source for particle loading.
///
/// Uses std::mt19937_64 (whose output sequence is fixed by the standard) with
/// explicit uniform/normal mappings, so a given seed reproduces the same
/// particle load on a given platform regardless of the C++ library's
/// distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [-1, 1).
  double uniform_pm1() { return 2.0 * uniform() - 1.0; }

  /// Standard normal via Box-Muller. Draws are generated in pairs; the spare
  /// is cached so consecutive calls consume the engine deterministically.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // Guard the log singularity at u1 == 0.
    while (u1 == 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace minipic
