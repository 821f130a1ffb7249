#include "minipic/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace minipic {

namespace {

constexpr int timed_reps = 3;  // after one warm-up repetition

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt_r(real_t v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", sizeof(real_t) == 4 ? 9 : 17,
                static_cast<double>(v));
  return buf;
}

/// Physics digest: one fresh run of the deck, returning the final
/// total_energy (and optionally the full diagnostics CSV).
real_t physics_digest(const Deck& deck, std::string* csv_out = nullptr,
                      bool sabotage = false) {
  SimState s = SimState::initialize(deck);
  if (sabotage) {
    // Stand-in for a buggy accumulation backend: kick species 0's momenta by
    // two percent so the run diverges well past any honest rounding spread.
    Species& sp = s.species().front();
    for (std::size_t p = 0; p < sp.store.size(); ++p)
      sp.store.r(p, particle_var::ux) =
          sp.store.r(p, particle_var::ux) * real_t(1.02) + real_t(0.001);
  }
  std::ostringstream csv;
  s.run(&csv);
  if (csv_out) *csv_out = csv.str();
  return s.current_diagnostics().total_energy;
}

/// Times fn() over warm-up + timed repetitions, returning the median.
template <class Fn>
double median_time(Fn&& fn) {
  fn();  // warm-up
  double t[timed_reps];
  for (int rep = 0; rep < timed_reps; ++rep) t[rep] = fn();
  return median3(t[0], t[1], t[2]);
}

}  // namespace

std::string bench_csv_header() {
  return "suite,config,grid_points,particles,workers,steps,wall_seconds,"
         "push_rate,normalized_runtime,total_energy";
}

void write_bench_csv(const BenchResult& r, std::ostream& out) {
  out << bench_csv_header() << '\n';
  for (const auto& row : r.rows) {
    out << r.suite << ',' << row.config << ',' << row.grid_points << ','
        << row.particles << ',' << row.workers << ',' << row.steps << ','
        << fmt(row.wall_seconds) << ',' << fmt(row.push_rate) << ','
        << fmt(row.normalized_runtime) << ',' << fmt_r(row.total_energy)
        << '\n';
  }
  if (!out) throw run_abort("write_bench_csv: sink write failed");
}

BenchResult bench_pushrate(const std::vector<int>& grid_edges,
                           std::size_t total_particles, long steps,
                           int workers) {
  if (grid_edges.empty())
    throw usage_error("bench_pushrate: need at least one grid size");
  BenchResult result{"pushrate", {}};
  for (int edge : grid_edges) {
    Deck deck;
    deck.grid.nx = deck.grid.ny = deck.grid.nz = edge;
    deck.grid.lx = deck.grid.ly = deck.grid.lz = static_cast<real_t>(edge);
    deck.grid.steps = steps;
    DeckSpecies sp;
    sp.name = "e";
    sp.q = -1;
    sp.m = 1;
    const std::size_t voxels =
        static_cast<std::size_t>(edge) * edge * edge;
    sp.ppc = std::max<int>(
        1, static_cast<int>((total_particles + voxels / 2) / voxels));
    sp.u_th = real_t(0.2);
    sp.sort_interval = 0;  // sorting off for this sweep
    deck.species.push_back(sp);
    deck.run.workers = workers;

    SimState s = SimState::initialize(deck);
    auto rep = [&]() {
      const double before = s.timings().push_and_scatter();
      for (long i = 0; i < steps; ++i) s.step();
      return s.timings().push_and_scatter() - before;
    };
    const double wall = median_time(rep);
    BenchRow row;
    row.config = "grid=" + std::to_string(edge) + "^3 ppc=" +
                 std::to_string(sp.ppc);
    row.grid_points = voxels;
    row.particles = s.total_particles();
    row.workers = workers;
    row.steps = steps;
    row.wall_seconds = wall;
    row.push_rate =
        wall > 0 ? static_cast<double>(row.particles) * steps / wall : 0;
    row.total_energy = s.current_diagnostics().total_energy;
    result.rows.push_back(row);
  }
  const double base = result.rows.front().wall_seconds;
  for (auto& row : result.rows)
    row.normalized_runtime = base > 0 ? row.wall_seconds / base : 0;
  return result;
}

BenchResult bench_scaling(ScalingMode mode, const std::vector<int>& workers,
                          const Deck& base) {
  if (workers.empty())
    throw usage_error("bench_scaling: need at least one worker count");
  BenchResult result{mode == ScalingMode::weak ? "scaling_weak"
                                               : "scaling_strong",
                     {}};
  std::string reference_csv;
  for (std::size_t i = 0; i < workers.size(); ++i) {
    const int w = workers[i];
    if (w < 1) throw usage_error("bench_scaling: worker counts must be >= 1");
    Deck deck = base;
    deck.run.workers = w;
    if (mode == ScalingMode::weak) {
      deck.grid.nx = base.grid.nx * w;
      deck.grid.lx = base.grid.lx * static_cast<real_t>(w);
    }

    // Correctness cross-check before timing: with a fixed problem and
    // deterministic mode, the diagnostics must not depend on worker count.
    std::string csv;
    const real_t digest = physics_digest(deck, &csv);
    if (mode == ScalingMode::strong && deck.run.deterministic) {
      if (i == 0) {
        reference_csv = csv;
      } else if (csv != reference_csv) {
        throw run_abort(
            "bench_scaling: deterministic diagnostics differ between " +
            std::to_string(workers[0]) + " and " + std::to_string(w) +
            " workers");
      }
    }

    auto rep = [&]() {
      SimState s = SimState::initialize(deck);
      const auto t0 = std::chrono::steady_clock::now();
      for (long k = 0; k < deck.grid.steps; ++k) s.step();
      return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           t0)
          .count();
    };
    const double wall = median_time(rep);

    BenchRow row;
    row.config = (mode == ScalingMode::weak ? "weak w=" : "strong w=") +
                 std::to_string(w);
    GridDescriptor g = make_grid(deck);
    row.grid_points = g.interior_voxels();
    std::size_t parts = 0;
    for (const auto& sp : deck.species)
      parts += static_cast<std::size_t>(sp.ppc) * g.interior_voxels();
    row.particles = parts;
    row.workers = w;
    row.steps = deck.grid.steps;
    row.wall_seconds = wall;
    row.push_rate = wall > 0
                        ? static_cast<double>(parts) * deck.grid.steps / wall
                        : 0;
    row.total_energy = digest;
    result.rows.push_back(row);
  }
  const double base_wall = result.rows.front().wall_seconds;
  for (auto& row : result.rows)
    row.normalized_runtime = base_wall > 0 ? row.wall_seconds / base_wall : 0;
  return result;
}

BenchResult bench_matrix(const Deck& base, real_t tolerance,
                         const MatrixOptions& options) {
  BenchResult result{"matrix", {}};
  const Layout layouts[] = {Layout::record_major, Layout::field_major};
  const char* sorts[] = {"none", "blocked", "interleaved"};
  const ScatterBackend backends[] = {ScatterBackend::replicated,
                                     ScatterBackend::shared_update};
  real_t reference = 0;
  bool have_reference = false;
  int cell = 0;
  for (Layout layout : layouts)
    for (const char* sort : sorts)
      for (ScatterBackend backend : backends) {
        Deck deck = base;
        deck.run.layout = layout;
        deck.run.scatter_backend = backend;
        for (auto& sp : deck.species) {
          if (std::string(sort) == "none") {
            sp.sort_interval = 0;
          } else {
            sp.sort_interval = sp.sort_interval > 0 ? sp.sort_interval : 10;
            sp.sort_order = std::string(sort) == "blocked"
                                ? SortOrder::blocked
                                : SortOrder::interleaved;
          }
        }

        const real_t digest =
            physics_digest(deck, nullptr, cell == options.sabotage_cell);
        if (!have_reference) {
          reference = digest;
          have_reference = true;
        } else {
          const real_t scale =
              std::max(std::fabs(reference), real_t(1e-30));
          if (std::fabs(digest - reference) > tolerance * scale) {
            throw run_abort(
                "bench_matrix: final total_energy disagrees beyond "
                "tolerance in cell '" +
                std::string(to_string(layout)) + " sort=" + sort + " " +
                to_string(backend) + "' (" + fmt_r(digest) + " vs " +
                fmt_r(reference) + ")");
          }
        }

        auto rep = [&]() {
          SimState s = SimState::initialize(deck);
          const auto t0 = std::chrono::steady_clock::now();
          for (long k = 0; k < deck.grid.steps; ++k) s.step();
          return std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0)
              .count();
        };
        const double wall = median_time(rep);

        BenchRow row;
        row.config = std::string("layout=") + to_string(layout) +
                     " sort=" + sort + " backend=" + to_string(backend);
        GridDescriptor g = make_grid(deck);
        row.grid_points = g.interior_voxels();
        std::size_t parts = 0;
        for (const auto& sp : deck.species)
          parts += static_cast<std::size_t>(sp.ppc) * g.interior_voxels();
        row.particles = parts;
        row.workers = deck.run.workers;
        row.steps = deck.grid.steps;
        row.wall_seconds = wall;
        row.push_rate =
            wall > 0 ? static_cast<double>(parts) * deck.grid.steps / wall
                     : 0;
        row.total_energy = digest;
        result.rows.push_back(row);
        ++cell;
      }
  const double base_wall = result.rows.front().wall_seconds;
  for (auto& row : result.rows)
    row.normalized_runtime = base_wall > 0 ? row.wall_seconds / base_wall : 0;
  return result;
}

void emit_plotscript(const BenchResult& r, const std::filesystem::path& csv,
                     const std::filesystem::path& out) {
  if (r.rows.empty())
    throw usage_error("emit_plotscript: empty bench result");
  std::ofstream o(out);
  if (!o) throw run_abort("emit_plotscript: cannot open " + out.string());
  o << "# gnuplot script generated by minipic bench\n";
  o << "set datafile separator comma\n";
  o << "set grid\n";
  o << "set term pngcairo size 900,600\n";
  o << "set output '" << out.stem().string() << ".png'\n";
  if (r.suite == "pushrate") {
    o << "set logscale x\n";
    o << "set xlabel 'grid points'\n";
    o << "set ylabel 'particle pushes per second'\n";
    o << "plot '" << csv.string()
      << "' every ::1 using 3:8 with linespoints title 'push rate'\n";
  } else if (r.suite.rfind("scaling", 0) == 0) {
    o << "set xlabel 'workers'\n";
    o << "set ylabel 'normalized runtime'\n";
    o << "plot '" << csv.string()
      << "' every ::1 using 5:9 with linespoints title '" << r.suite
      << "'\n";
  } else {
    o << "set style data histograms\n";
    o << "set style fill solid 0.8\n";
    o << "set xtics rotate by -35\n";
    o << "set ylabel 'wall seconds'\n";
    o << "plot '" << csv.string()
      << "' every ::1 using 7:xtic(2) title 'matrix cells'\n";
  }
  if (!o) throw run_abort("emit_plotscript: write failed for " + out.string());
}

}  // namespace minipic
