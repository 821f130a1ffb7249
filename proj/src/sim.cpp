#include "minipic/sim.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

namespace minipic {

namespace pv = particle_var;
namespace fv = field_var;

namespace {

constexpr double pi = 3.14159265358979323846;

kernels::Arch arch_for(KernelChoice c) {
  switch (c) {
    case KernelChoice::automatic: return kernels::detect_arch();
    case KernelChoice::scalar: return kernels::Arch::scalar;
    case KernelChoice::simd: return kernels::Arch::avx2;
  }
  return kernels::Arch::scalar;
}

std::string fmt_real(real_t v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", sizeof(real_t) == 4 ? 9 : 17,
                static_cast<double>(v));
  return buf;
}

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string diagnostics_header(const std::vector<std::string>& species_names) {
  std::string h = "step,time,e_energy,b_energy";
  for (const auto& n : species_names) h += ",kinetic_" + n;
  h +=
      ",total_energy,max_div_e_err,max_div_b_err,particle_count,"
      "wall_seconds_this_interval,push_rate";
  return h;
}

SimState::SimState(const Deck& deck)
    : deck_(deck),
      grid_(make_grid(deck)),
      kernels_(&kernels::kernels_for(arch_for(deck.run.kernel))),
      pool_(std::make_unique<ThreadPool>(deck.run.workers)),
      fields_(grid_, deck.run.layout, SpaceTag{"device"}),
      host_fields_(fields_.mirror_in(SpaceTag{"host"})),
      interp_(grid_, deck.run.layout),
      scatter_(std::make_unique<ScatterBuffer>(
          grid_.padded_voxels(), accum_var::count, deck.run.scatter_backend,
          deck.run.workers)),
      reduced_(grid_.padded_voxels() * accum_var::count, real_t(0)) {
  species_.reserve(deck.species.size());
  for (const auto& ds : deck.species) {
    const std::size_t count =
        static_cast<std::size_t>(ds.ppc) * grid_.interior_voxels();
    species_.push_back(Species{ds.name, ds.q, ds.m, ds.sort_interval,
                               ds.sort_order,
                               ParticleStore(count, deck.run.layout,
                                             SpaceTag{"device"})});
    host_particles_.push_back(
        species_.back().store.mirror_in(SpaceTag{"host"}));
  }
}

SimState SimState::initialize(const Deck& deck) {
  SimState s(deck);
  const GridDescriptor& g = s.grid_;

  for (std::size_t si = 0; si < s.species_.size(); ++si) {
    const DeckSpecies& ds = deck.species[si];
    ParticleStore& st = s.species_[si].store;
    // One engine per species so adding a species never shifts another's load.
    Rng rng(deck.run.seed + 0x9e3779b9u * (si + 1));
    std::size_t p = 0;
    for (int iz = 1; iz <= g.nz; ++iz)
      for (int iy = 1; iy <= g.ny; ++iy)
        for (int ix = 1; ix <= g.nx; ++ix) {
          const voxel_id v = voxel_of_unchecked(ix, iy, iz, g);
          for (int k = 0; k < ds.ppc; ++k, ++p) {
            const real_t dx = static_cast<real_t>(rng.uniform_pm1());
            const real_t dy = static_cast<real_t>(rng.uniform_pm1());
            const real_t dz = static_cast<real_t>(rng.uniform_pm1());
            real_t ux = ds.drift[0] + ds.u_th * static_cast<real_t>(rng.normal());
            real_t uy = ds.drift[1] + ds.u_th * static_cast<real_t>(rng.normal());
            real_t uz = ds.drift[2] + ds.u_th * static_cast<real_t>(rng.normal());
            if (ds.perturb_ux != 0) {
              const real_t xg =
                  (static_cast<real_t>(ix - 1) + (dx + 1) * real_t(0.5)) * g.hx;
              ux += ds.perturb_ux *
                    std::sin(static_cast<real_t>(2 * pi * ds.perturb_kmode) *
                             xg / g.lx());
            }
            st.r(p, pv::dx) = dx;
            st.r(p, pv::dy) = dy;
            st.r(p, pv::dz) = dz;
            st.r(p, pv::ux) = ux;
            st.r(p, pv::uy) = uy;
            st.r(p, pv::uz) = uz;
            st.r(p, pv::w) = 1;
            st.id[p] = v;
          }
        }
  }

  // Zero-E initialization satisfies the discrete Gauss law only for decks
  // whose total charge vanishes; otherwise the residual is frozen but must
  // stay constant under the charge-conserving deposition.
  real_t total_charge = 0, abs_charge = 0;
  for (const auto& sp : s.species_) {
    total_charge += sp.q * static_cast<real_t>(sp.store.size());
    abs_charge += std::fabs(sp.q) * static_cast<real_t>(sp.store.size());
  }
  if (std::fabs(total_charge) >
      real_t(1e-12) * (abs_charge + real_t(1))) {
    s.warnings_.push_back(
        "non-neutral deck with zero-E initialization: the Gauss residual "
        "starts nonzero and should stay constant");
  }

  ghost_sync_fields(s.fields_, g);
  s.refresh_charge_diagnostics();
  s.copy_base_ = copy_count();
  s.last_diag_wall_ = std::chrono::steady_clock::now();
  s.last_diag_step_ = 0;
  return s;
}

std::size_t SimState::total_particles() const {
  std::size_t n = 0;
  for (const auto& sp : species_) n += sp.store.size();
  return n;
}

void SimState::step() {
  using clock = std::chrono::steady_clock;
  ThreadPool* pool = pool_.get();
  const DeckRun& r = deck_.run;

  scatter_->clear();
  clear_currents(fields_);

  auto t0 = clock::now();
  load_interpolators(fields_, grid_, interp_, pool);
  auto t1 = clock::now();
  timings_.interpolate += std::chrono::duration<double>(t1 - t0).count();

  for (auto& sp : species_) {
    advance_particles(sp, interp_, *scatter_, grid_, r.chunk_size, *kernels_,
                      pool, r.exact_gyration,
                      r.deterministic ? &stage_ : nullptr);
    if (r.deterministic) replay_deposits(sp, stage_, *scatter_, grid_);
  }
  auto t2 = clock::now();
  timings_.push += std::chrono::duration<double>(t2 - t1).count();

  scatter_->reduce(reduced_);
  ghost_fold_currents(reduced_, accum_var::count, grid_);
  unload_currents(reduced_, accum_var::count, fields_, grid_);
  auto t3 = clock::now();
  timings_.scatter += std::chrono::duration<double>(t3 - t2).count();

  // B and E ghosts feed each half-update's one-sided stencils, so each
  // substep is followed by a sync.
  advance_b(fields_, grid_, real_t(0.5), *kernels_, pool);
  ghost_sync_fields(fields_, grid_);
  advance_e(fields_, grid_, *kernels_, pool);
  ghost_sync_fields(fields_, grid_);
  advance_b(fields_, grid_, real_t(0.5), *kernels_, pool);
  ghost_sync_fields(fields_, grid_);
  auto t4 = clock::now();
  timings_.field += std::chrono::duration<double>(t4 - t3).count();

  ++step_count_;
}

void SimState::register_hook(HookRegistration h) {
  if (h.interval < 1) throw usage_error("register_hook: interval must be >= 1");
  hooks_.push_back(std::move(h));
}

void SimState::run_hooks() {
  for (auto& h : hooks_) {
    if (step_count_ == 0 || step_count_ % h.interval != 0) continue;
    if (h.flags.particles_to_host)
      for (std::size_t i = 0; i < species_.size(); ++i) {
        copy_between(species_[i].store.r, host_particles_[i].r);
        host_particles_[i].id = species_[i].store.id;
      }
    if (h.flags.fields_to_host) copy_between(fields_.f, host_fields_.f);
    if (h.action) {
      HookContext ctx{*this, step_count_, host_fields_, host_particles_};
      try {
        h.action(ctx);
      } catch (const std::exception& e) {
        throw run_abort("hook '" + h.name + "' failed at step " +
                        std::to_string(step_count_) + ": " + e.what());
      }
    }
    if (h.flags.particles_back)
      for (std::size_t i = 0; i < species_.size(); ++i) {
        copy_between(host_particles_[i].r, species_[i].store.r);
        species_[i].store.id = host_particles_[i].id;
      }
    if (h.flags.fields_back) copy_between(host_fields_.f, fields_.f);
  }
}

void SimState::sort_due_species() {
  for (auto& sp : species_) {
    if (sp.sort_interval > 0 && step_count_ % sp.sort_interval == 0)
      sort_particles(sp, sp.sort_order);
  }
}

void SimState::refresh_charge_diagnostics() {
  clear_rho(fields_);
  for (const auto& sp : species_) deposit_rho(sp, fields_, grid_);
  compute_div_errors(fields_, grid_);
}

DiagnosticsRecord SimState::current_diagnostics() {
  DiagnosticsRecord rec;
  rec.step = step_count_;
  rec.time = static_cast<real_t>(step_count_) * grid_.dt;
  const FieldEnergy fe = field_energy(fields_, grid_, *kernels_);
  rec.e_energy = fe.e;
  rec.b_energy = fe.b;
  real_t total = fe.e + fe.b;
  // Fresh coefficients so the momentum recentering sees the current fields.
  load_interpolators(fields_, grid_, interp_, pool_.get());
  for (const auto& sp : species_) {
    const real_t k = kinetic_energy_centered(sp, interp_, grid_);
    rec.kinetic.push_back(k);
    total += k;
  }
  rec.total_energy = total;
  rec.max_div_e_err = max_abs_lane(fields_, grid_, fv::div_e_err);
  rec.max_div_b_err = max_abs_lane(fields_, grid_, fv::div_b_err);
  rec.particle_count = total_particles();

  const auto now = std::chrono::steady_clock::now();
  const double wall =
      std::chrono::duration<double>(now - last_diag_wall_).count();
  const long dsteps = step_count_ - last_diag_step_;
  if (deck_.run.deterministic) {
    rec.wall_seconds = 0;
    rec.push_rate = 0;
  } else {
    rec.wall_seconds = wall;
    rec.push_rate =
        wall > 0 ? static_cast<double>(total_particles()) * dsteps / wall : 0;
  }
  last_diag_wall_ = now;
  last_diag_step_ = step_count_;
  return rec;
}

void SimState::emit_diagnostics(std::ostream& sink) {
  if (!header_written_) {
    std::vector<std::string> names;
    for (const auto& sp : species_) names.push_back(sp.name);
    sink << diagnostics_header(names) << '\n';
    header_written_ = true;
  }
  const DiagnosticsRecord rec = current_diagnostics();
  sink << rec.step << ',' << fmt_real(rec.time) << ','
       << fmt_real(rec.e_energy) << ',' << fmt_real(rec.b_energy);
  for (real_t k : rec.kinetic) sink << ',' << fmt_real(k);
  sink << ',' << fmt_real(rec.total_energy) << ','
       << fmt_real(rec.max_div_e_err) << ',' << fmt_real(rec.max_div_b_err)
       << ',' << rec.particle_count << ',' << fmt_double(rec.wall_seconds)
       << ',' << fmt_double(rec.push_rate) << '\n';
  if (!sink) throw run_abort("emit_diagnostics: sink write failed");
}

void SimState::run(std::ostream* csv) {
  namespace fs = std::filesystem;
  const DeckRun& r = deck_.run;
  if (r.field_dump_interval > 0) fs::create_directories(r.out_dir);
  if (csv) emit_diagnostics(*csv);
  for (long i = 0; i < deck_.grid.steps; ++i) {
    step();
    sort_due_species();
    const bool diag_due = step_count_ % r.diag_interval == 0;
    if (diag_due) refresh_charge_diagnostics();
    run_hooks();
    if (diag_due && csv) emit_diagnostics(*csv);
    if (r.field_dump_interval > 0 &&
        step_count_ % r.field_dump_interval == 0) {
      dump_fields(fields_, grid_,
                  fs::path(r.out_dir) /
                      ("fields_" + std::to_string(step_count_) + ".bin"),
                  DumpFormat::binary);
    }
  }
}

}  // namespace minipic
