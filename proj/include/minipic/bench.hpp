#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "minipic/sim.hpp"

namespace minipic {

struct BenchRow {
  std::string config;
  std::size_t grid_points = 0;  ///< interior voxels
  std::size_t particles = 0;
  int workers = 1;
  long steps = 0;
  double wall_seconds = 0;      ///< median of the timed repetitions
  double push_rate = 0;         ///< particles * steps / wall_seconds
  double normalized_runtime = 0;
  real_t total_energy = 0;      ///< end-of-run physics digest
};

struct BenchResult {
  std::string suite;
  std::vector<BenchRow> rows;
};

/// Fixed CSV schema shared by all suites.
std::string bench_csv_header();
void write_bench_csv(const BenchResult& r, std::ostream& out);

/// Push-rate sweep over cubic grids at a fixed total particle budget. Only
/// interpolator loading, particle advance and scatter reduction are timed;
/// field updates, diagnostics and I/O are excluded, and sorting is off.
BenchResult bench_pushrate(const std::vector<int>& grid_edges,
                           std::size_t total_particles, long steps,
                           int workers = 1);

enum class ScalingMode { weak, strong };

/// Thread-count scaling of the full step. weak scales interior voxels (and
/// so particles) proportionally to the worker count; strong keeps the
/// problem fixed. normalized_runtime is relative to the smallest worker
/// count. In deterministic strong mode every row's diagnostics must be
/// byte-identical; a mismatch aborts.
BenchResult bench_scaling(ScalingMode mode, const std::vector<int>& workers,
                          const Deck& base);

struct MatrixOptions {
  /// Test hook: runs the given cell with a deliberately perturbed state so
  /// the cross-cell energy agreement check must fire.
  int sabotage_cell = -1;
};

/// Layout x sort x backend cross product (12 cells) on one deck. Every cell
/// must reproduce the same final total energy within tolerance; a
/// disagreement aborts (benchmarks never trade correctness silently).
BenchResult bench_matrix(const Deck& base, real_t tolerance = real_t(1e-4),
                         const MatrixOptions& options = {});

/// Writes a gnuplot script rendering the suite's CSV: push_rate vs grid
/// size (log x) for pushrate, normalized runtime vs workers for scaling,
/// per-config bars for matrix.
void emit_plotscript(const BenchResult& r, const std::filesystem::path& csv,
                     const std::filesystem::path& out);

}  // namespace minipic
