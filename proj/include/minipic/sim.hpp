#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "minipic/fields.hpp"
#include "minipic/grid.hpp"
#include "minipic/kernels/dispatch.hpp"
#include "minipic/particles.hpp"
#include "minipic/rng.hpp"
#include "minipic/thread_pool.hpp"

namespace minipic {

enum class KernelChoice { automatic, scalar, simd };
const char* to_string(KernelChoice c);

struct DeckGrid {
  int nx = 0, ny = 0, nz = 0;
  real_t lx = 0, ly = 0, lz = 0;
  std::optional<real_t> dt;        ///< absolute timestep; wins over fraction
  real_t cfl_fraction = real_t(0.95);
  long steps = 0;
};

struct DeckSpecies {
  std::string name;
  real_t q = 0;
  real_t m = 1;
  int ppc = 0;                     ///< particles per interior voxel
  real_t u_th = 0;                 ///< thermal momentum spread
  real_t drift[3] = {0, 0, 0};
  int sort_interval = 20;
  SortOrder sort_order = SortOrder::blocked;
  real_t perturb_ux = 0;           ///< sinusoidal x-momentum perturbation amplitude
  int perturb_kmode = 1;           ///< wavelengths across the x extent
};

struct DeckRun {
  std::uint64_t seed = 1;
  Layout layout = Layout::field_major;
  ScatterBackend scatter_backend = ScatterBackend::replicated;
  int workers = 1;
  std::size_t chunk_size = 2048;
  bool deterministic = false;
  long diag_interval = 10;
  long field_dump_interval = 0;    ///< 0 = never
  std::string out_dir = "out";
  bool exact_gyration = false;
  KernelChoice kernel = KernelChoice::automatic;
};

struct Deck {
  DeckGrid grid;
  std::vector<DeckSpecies> species;
  DeckRun run;
};

class deck_parse_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Parses the flat key-value deck text ([grid] / [species.NAME] / [run]
/// sections, key = value lines, # comments). Unknown or missing keys and
/// constraint violations raise deck_parse_error naming the key and line.
Deck parse_deck(const std::string& text);
Deck parse_deck_file(const std::filesystem::path& path);

/// Canonical text form; parse(serialize(d)) reproduces d.
std::string serialize_deck(const Deck& d);

/// Applies a dotted-path override such as "run.layout=record_major" or
/// "species.electron.ppc=4"; revalidates the deck.
void apply_override(Deck& d, const std::string& key_eq_value);

/// Resolved geometry: spacings from extents, dt from the deck's absolute
/// value or its CFL fraction.
GridDescriptor make_grid(const Deck& d);

struct DiagnosticsRecord {
  long step = 0;
  real_t time = 0;
  real_t e_energy = 0;
  real_t b_energy = 0;
  std::vector<real_t> kinetic;  ///< per species, deck order
  real_t total_energy = 0;
  real_t max_div_e_err = 0;
  real_t max_div_b_err = 0;
  std::size_t particle_count = 0;
  double wall_seconds = 0;      ///< wall time since the previous row
  double push_rate = 0;         ///< particles * steps / wall_seconds
};

struct HookFlags {
  bool particles_to_host = false;
  bool fields_to_host = false;
  bool particles_back = false;
  bool fields_back = false;

  static HookFlags legacy() { return {true, true, true, true}; }
  static HookFlags none() { return {}; }
};

class SimState;

/// What a hook sees: host mirrors (refreshed per its flags) plus the step.
struct HookContext {
  SimState& state;
  long step;
  FieldArray& host_fields;
  std::vector<ParticleStore>& host_particles;  ///< one per species, deck order
};

struct HookRegistration {
  std::string name = "hook";
  long interval = 1;
  HookFlags flags = HookFlags::legacy();
  std::function<void(HookContext&)> action;
};

/// Accumulated wall time of the step phases, for the benchmark suites.
struct PhaseTimings {
  double interpolate = 0;  ///< interpolator loading
  double push = 0;         ///< particle advance (+ ordered replay)
  double scatter = 0;      ///< reduce + ghost fold + current unload
  double field = 0;        ///< B/E updates + ghost sync
  double push_and_scatter() const { return interpolate + push + scatter; }
};

class SimState {
public:
  /// Builds the initial state: zeroed fields, particles loaded per species
  /// (uniform offsets, drifting Maxwellian momenta, optional sinusoidal
  /// perturbation), charge deposited once, diagnostics primed.
  static SimState initialize(const Deck& deck);

  void step();
  void register_hook(HookRegistration h);

  /// Runs deck.grid.steps steps, emitting diagnostics (and the step-0 row)
  /// to csv when non-null, honoring diagnostic / dump / sort / hook cadences.
  void run(std::ostream* csv);

  /// Appends one CSV row for the current state; writes the header first on
  /// first use of this state.
  void emit_diagnostics(std::ostream& sink);

  /// Recomputes the charge density and divergence-error lanes. The run loop
  /// does this on the diagnostic cadence; the push never reads them.
  void refresh_charge_diagnostics();

  DiagnosticsRecord current_diagnostics();

  const Deck& deck() const { return deck_; }
  const GridDescriptor& grid() const { return grid_; }
  long step_count() const { return step_count_; }
  FieldArray& fields() { return fields_; }
  std::vector<Species>& species() { return species_; }
  ScatterBuffer& scatter() { return *scatter_; }
  const kernels::Kernels& kernels() const { return *kernels_; }
  ThreadPool& pool() { return *pool_; }
  const PhaseTimings& timings() const { return timings_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t total_particles() const;

  /// FieldedBuffer copies attributed to this state (hook data movement).
  std::uint64_t copies_performed() const { return copy_count() - copy_base_; }

  /// Deterministic runs zero the timing columns so repeated runs produce
  /// byte-identical CSV output.
  bool deterministic() const { return deck_.run.deterministic; }

private:
  SimState(const Deck& deck);

  void run_hooks();
  void sort_due_species();

  Deck deck_;
  GridDescriptor grid_;
  const kernels::Kernels* kernels_;
  std::unique_ptr<ThreadPool> pool_;
  FieldArray fields_;
  FieldArray host_fields_;
  std::vector<Species> species_;
  std::vector<ParticleStore> host_particles_;
  InterpolatorArray interp_;
  std::unique_ptr<ScatterBuffer> scatter_;
  std::vector<real_t> reduced_;
  DepositStage stage_;
  std::vector<HookRegistration> hooks_;
  std::vector<std::string> warnings_;
  long step_count_ = 0;
  bool header_written_ = false;
  std::uint64_t copy_base_ = 0;
  PhaseTimings timings_;
  std::chrono::steady_clock::time_point last_diag_wall_;
  long last_diag_step_ = 0;
};

/// Writes the diagnostics CSV header for the given species names.
std::string diagnostics_header(const std::vector<std::string>& species_names);

}  // namespace minipic
