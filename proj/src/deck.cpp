#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "minipic/sim.hpp"

namespace minipic {

const char* to_string(KernelChoice c) {
  switch (c) {
    case KernelChoice::automatic: return "auto";
    case KernelChoice::scalar: return "scalar";
    case KernelChoice::simd: return "simd";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& key, int line, const std::string& why) {
  throw deck_parse_error("deck: key '" + key + "' (line " +
                         std::to_string(line) + "): " + why);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) fail(key, line, "trailing characters in '" + v + "'");
    return d;
  } catch (const deck_parse_error&) {
    throw;
  } catch (...) {
    fail(key, line, "not a number: '" + v + "'");
  }
}

long parse_int(const std::string& key, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) fail(key, line, "trailing characters in '" + v + "'");
    return d;
  } catch (const deck_parse_error&) {
    throw;
  } catch (...) {
    fail(key, line, "not an integer: '" + v + "'");
  }
}

bool parse_bool(const std::string& key, int line, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  fail(key, line, "not a boolean: '" + v + "'");
}

void parse_vec3(const std::string& key, int line, const std::string& v,
                real_t out[3]) {
  std::istringstream iss(v);
  std::string a, b, c, extra;
  if (!(iss >> a >> b >> c) || (iss >> extra))
    fail(key, line, "expected three numbers, got '" + v + "'");
  out[0] = static_cast<real_t>(parse_real(key, line, a));
  out[1] = static_cast<real_t>(parse_real(key, line, b));
  out[2] = static_cast<real_t>(parse_real(key, line, c));
}

void set_grid_key(DeckGrid& g, const std::string& key, const std::string& v,
                  int line) {
  if (key == "nx") g.nx = static_cast<int>(parse_int(key, line, v));
  else if (key == "ny") g.ny = static_cast<int>(parse_int(key, line, v));
  else if (key == "nz") g.nz = static_cast<int>(parse_int(key, line, v));
  else if (key == "lx") g.lx = static_cast<real_t>(parse_real(key, line, v));
  else if (key == "ly") g.ly = static_cast<real_t>(parse_real(key, line, v));
  else if (key == "lz") g.lz = static_cast<real_t>(parse_real(key, line, v));
  else if (key == "dt") g.dt = static_cast<real_t>(parse_real(key, line, v));
  else if (key == "cfl_fraction")
    g.cfl_fraction = static_cast<real_t>(parse_real(key, line, v));
  else if (key == "steps") g.steps = parse_int(key, line, v);
  else fail("grid." + key, line, "unknown key");
}

void set_species_key(DeckSpecies& s, const std::string& key,
                     const std::string& v, int line) {
  const std::string full = "species." + s.name + "." + key;
  if (key == "q") s.q = static_cast<real_t>(parse_real(full, line, v));
  else if (key == "m") s.m = static_cast<real_t>(parse_real(full, line, v));
  else if (key == "ppc") s.ppc = static_cast<int>(parse_int(full, line, v));
  else if (key == "u_th") s.u_th = static_cast<real_t>(parse_real(full, line, v));
  else if (key == "drift") parse_vec3(full, line, v, s.drift);
  else if (key == "sort_interval")
    s.sort_interval = static_cast<int>(parse_int(full, line, v));
  else if (key == "sort_order") {
    if (v == "blocked") s.sort_order = SortOrder::blocked;
    else if (v == "interleaved") s.sort_order = SortOrder::interleaved;
    else fail(full, line, "expected blocked|interleaved");
  } else if (key == "perturb_ux")
    s.perturb_ux = static_cast<real_t>(parse_real(full, line, v));
  else if (key == "perturb_kmode")
    s.perturb_kmode = static_cast<int>(parse_int(full, line, v));
  else fail(full, line, "unknown key");
}

void set_run_key(DeckRun& r, const std::string& key, const std::string& v,
                 int line) {
  const std::string full = "run." + key;
  if (key == "seed")
    r.seed = static_cast<std::uint64_t>(parse_int(full, line, v));
  else if (key == "layout") {
    if (v == "record_major") r.layout = Layout::record_major;
    else if (v == "field_major") r.layout = Layout::field_major;
    else fail(full, line, "expected record_major|field_major");
  } else if (key == "scatter_backend") {
    if (v == "replicated") r.scatter_backend = ScatterBackend::replicated;
    else if (v == "shared_update") r.scatter_backend = ScatterBackend::shared_update;
    else if (v == "sequential") r.scatter_backend = ScatterBackend::sequential;
    else fail(full, line, "expected replicated|shared_update|sequential");
  } else if (key == "workers")
    r.workers = static_cast<int>(parse_int(full, line, v));
  else if (key == "chunk_size")
    r.chunk_size = static_cast<std::size_t>(parse_int(full, line, v));
  else if (key == "deterministic")
    r.deterministic = parse_bool(full, line, v);
  else if (key == "diag_interval")
    r.diag_interval = parse_int(full, line, v);
  else if (key == "field_dump_interval")
    r.field_dump_interval = parse_int(full, line, v);
  else if (key == "out_dir")
    r.out_dir = v;
  else if (key == "exact_gyration")
    r.exact_gyration = parse_bool(full, line, v);
  else if (key == "kernel") {
    if (v == "auto") r.kernel = KernelChoice::automatic;
    else if (v == "scalar") r.kernel = KernelChoice::scalar;
    else if (v == "simd") r.kernel = KernelChoice::simd;
    else fail(full, line, "expected auto|scalar|simd");
  } else fail(full, line, "unknown key");
}

void validate(const Deck& d) {
  const DeckGrid& g = d.grid;
  if (g.nx < 2 || g.ny < 2 || g.nz < 2)
    throw deck_parse_error("deck: grid.nx/ny/nz must be >= 2");
  if (!(g.lx > 0) || !(g.ly > 0) || !(g.lz > 0))
    throw deck_parse_error("deck: grid.lx/ly/lz must be positive");
  if (g.steps < 0) throw deck_parse_error("deck: grid.steps must be >= 0");
  if (!(g.cfl_fraction > 0) || g.cfl_fraction > real_t(0.99))
    throw deck_parse_error("deck: grid.cfl_fraction must be in (0, 0.99]");
  if (d.species.empty())
    throw deck_parse_error("deck: at least one [species.NAME] block required");
  for (const auto& s : d.species) {
    const std::string p = "deck: species." + s.name + ".";
    if (!(s.m > 0)) throw deck_parse_error(p + "m must be positive");
    if (s.ppc < 0) throw deck_parse_error(p + "ppc must be >= 0");
    if (s.u_th < 0) throw deck_parse_error(p + "u_th must be >= 0");
    if (s.sort_interval < 0)
      throw deck_parse_error(p + "sort_interval must be >= 0");
    if (s.perturb_kmode < 1)
      throw deck_parse_error(p + "perturb_kmode must be >= 1");
  }
  const DeckRun& r = d.run;
  if (r.workers < 1) throw deck_parse_error("deck: run.workers must be >= 1");
  if (r.chunk_size < 1)
    throw deck_parse_error("deck: run.chunk_size must be >= 1");
  if (r.diag_interval < 1)
    throw deck_parse_error("deck: run.diag_interval must be >= 1");
  if (r.field_dump_interval < 0)
    throw deck_parse_error("deck: run.field_dump_interval must be >= 0");
  // Resolve the timestep and apply the stability bound.
  try {
    validate_grid(make_grid(d));
  } catch (const usage_error& e) {
    throw deck_parse_error(std::string("deck: grid.dt: ") + e.what());
  }
}

}  // namespace

GridDescriptor make_grid(const Deck& d) {
  GridDescriptor g;
  g.nx = d.grid.nx;
  g.ny = d.grid.ny;
  g.nz = d.grid.nz;
  g.hx = d.grid.lx / static_cast<real_t>(d.grid.nx);
  g.hy = d.grid.ly / static_cast<real_t>(d.grid.ny);
  g.hz = d.grid.lz / static_cast<real_t>(d.grid.nz);
  g.dt = d.grid.dt ? *d.grid.dt : d.grid.cfl_fraction * cfl_limit(g);
  return g;
}

Deck parse_deck(const std::string& text) {
  Deck d;
  enum class Section { none, grid, species, run } section = Section::none;
  int species_index = -1;
  bool saw_grid = false, saw_run = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  // Required-key tracking.
  std::vector<std::string> grid_seen;
  std::vector<std::vector<std::string>> species_seen;

  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']')
        throw deck_parse_error("deck: malformed section header (line " +
                               std::to_string(line) + ")");
      const std::string name = trim(s.substr(1, s.size() - 2));
      if (name == "grid") {
        if (saw_grid)
          throw deck_parse_error("deck: duplicate [grid] section (line " +
                                 std::to_string(line) + ")");
        saw_grid = true;
        section = Section::grid;
      } else if (name == "run") {
        if (saw_run)
          throw deck_parse_error("deck: duplicate [run] section (line " +
                                 std::to_string(line) + ")");
        saw_run = true;
        section = Section::run;
      } else if (name.rfind("species.", 0) == 0) {
        const std::string sp_name = name.substr(8);
        if (sp_name.empty())
          throw deck_parse_error("deck: species section needs a name (line " +
                                 std::to_string(line) + ")");
        for (const auto& sp : d.species)
          if (sp.name == sp_name)
            throw deck_parse_error("deck: duplicate species '" + sp_name +
                                   "' (line " + std::to_string(line) + ")");
        DeckSpecies sp;
        sp.name = sp_name;
        d.species.push_back(sp);
        species_seen.emplace_back();
        species_index = static_cast<int>(d.species.size()) - 1;
        section = Section::species;
      } else {
        throw deck_parse_error("deck: unknown section '" + name + "' (line " +
                               std::to_string(line) + ")");
      }
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw deck_parse_error("deck: expected key = value (line " +
                             std::to_string(line) + ")");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail("?", line, "empty key");
    if (value.empty()) fail(key, line, "empty value");

    switch (section) {
      case Section::none:
        throw deck_parse_error("deck: key '" + key +
                               "' outside any section (line " +
                               std::to_string(line) + ")");
      case Section::grid:
        set_grid_key(d.grid, key, value, line);
        grid_seen.push_back(key);
        break;
      case Section::species:
        set_species_key(d.species[static_cast<std::size_t>(species_index)], key,
                        value, line);
        species_seen[static_cast<std::size_t>(species_index)].push_back(key);
        break;
      case Section::run:
        set_run_key(d.run, key, value, line);
        break;
    }
  }

  if (!saw_grid) throw deck_parse_error("deck: missing [grid] section");
  for (const char* k : {"nx", "ny", "nz", "lx", "ly", "lz", "steps"})
    if (std::find(grid_seen.begin(), grid_seen.end(), k) == grid_seen.end())
      throw deck_parse_error(std::string("deck: missing required key grid.") +
                             k);
  for (std::size_t i = 0; i < d.species.size(); ++i)
    for (const char* k : {"q", "m", "ppc"})
      if (std::find(species_seen[i].begin(), species_seen[i].end(), k) ==
          species_seen[i].end())
        throw deck_parse_error("deck: missing required key species." +
                               d.species[i].name + "." + k);
  validate(d);
  return d;
}

Deck parse_deck_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw deck_parse_error("deck: cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_deck(ss.str());
}

namespace {
std::string fmt_real(real_t v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", sizeof(real_t) == 4 ? 9 : 17,
                static_cast<double>(v));
  return buf;
}
}  // namespace

std::string serialize_deck(const Deck& d) {
  std::ostringstream o;
  o << "[grid]\n";
  o << "nx = " << d.grid.nx << "\nny = " << d.grid.ny
    << "\nnz = " << d.grid.nz << "\n";
  o << "lx = " << fmt_real(d.grid.lx) << "\nly = " << fmt_real(d.grid.ly)
    << "\nlz = " << fmt_real(d.grid.lz) << "\n";
  if (d.grid.dt) o << "dt = " << fmt_real(*d.grid.dt) << "\n";
  else o << "cfl_fraction = " << fmt_real(d.grid.cfl_fraction) << "\n";
  o << "steps = " << d.grid.steps << "\n";
  for (const auto& s : d.species) {
    o << "\n[species." << s.name << "]\n";
    o << "q = " << fmt_real(s.q) << "\nm = " << fmt_real(s.m)
      << "\nppc = " << s.ppc << "\n";
    o << "u_th = " << fmt_real(s.u_th) << "\n";
    o << "drift = " << fmt_real(s.drift[0]) << ' ' << fmt_real(s.drift[1])
      << ' ' << fmt_real(s.drift[2]) << "\n";
    o << "sort_interval = " << s.sort_interval << "\n";
    o << "sort_order = " << to_string(s.sort_order) << "\n";
    if (s.perturb_ux != 0) {
      o << "perturb_ux = " << fmt_real(s.perturb_ux) << "\n";
      o << "perturb_kmode = " << s.perturb_kmode << "\n";
    }
  }
  o << "\n[run]\n";
  o << "seed = " << d.run.seed << "\n";
  o << "layout = " << to_string(d.run.layout) << "\n";
  o << "scatter_backend = " << to_string(d.run.scatter_backend) << "\n";
  o << "workers = " << d.run.workers << "\n";
  o << "chunk_size = " << d.run.chunk_size << "\n";
  o << "deterministic = " << (d.run.deterministic ? "true" : "false") << "\n";
  o << "diag_interval = " << d.run.diag_interval << "\n";
  o << "field_dump_interval = " << d.run.field_dump_interval << "\n";
  o << "out_dir = " << d.run.out_dir << "\n";
  o << "exact_gyration = " << (d.run.exact_gyration ? "true" : "false")
    << "\n";
  o << "kernel = " << to_string(d.run.kernel) << "\n";
  return o.str();
}

void apply_override(Deck& d, const std::string& key_eq_value) {
  const auto eq = key_eq_value.find('=');
  if (eq == std::string::npos)
    throw deck_parse_error("override: expected key=value, got '" +
                           key_eq_value + "'");
  const std::string path = trim(key_eq_value.substr(0, eq));
  const std::string value = trim(key_eq_value.substr(eq + 1));
  const auto dot = path.find('.');
  if (dot == std::string::npos)
    throw deck_parse_error("override: key '" + path +
                           "' must be section.key");
  const std::string section = path.substr(0, dot);
  const std::string rest = path.substr(dot + 1);
  if (section == "grid") {
    set_grid_key(d.grid, rest, value, 0);
  } else if (section == "run") {
    set_run_key(d.run, rest, value, 0);
  } else if (section == "species") {
    const auto dot2 = rest.find('.');
    if (dot2 == std::string::npos)
      throw deck_parse_error("override: species key must be species.NAME.key");
    const std::string name = rest.substr(0, dot2);
    const std::string key = rest.substr(dot2 + 1);
    for (auto& s : d.species)
      if (s.name == name) {
        set_species_key(s, key, value, 0);
        validate(d);
        return;
      }
    throw deck_parse_error("override: no species named '" + name + "'");
  } else {
    throw deck_parse_error("override: unknown section '" + section + "'");
  }
  validate(d);
}

}  // namespace minipic
