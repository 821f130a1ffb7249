// Command-line front end: `run` executes a deck, `bench` drives the
// measurement suites, `plot` renders a bench CSV to a gnuplot script.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minipic/bench.hpp"
#include "minipic/sim.hpp"

namespace fs = std::filesystem;
using namespace minipic;

namespace {

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

void write_result(const BenchResult& r, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const fs::path csv = out_dir / ("bench_" + r.suite + ".csv");
  std::ofstream f(csv);
  write_bench_csv(r, f);
  const fs::path gp = out_dir / ("bench_" + r.suite + ".gp");
  emit_plotscript(r, csv, gp);
  std::cout << r.suite << ": " << r.rows.size() << " rows -> " << csv.string()
            << "\n";
}

int cmd_run(const std::string& deck_path,
            const std::vector<std::string>& overrides) {
  Deck deck = parse_deck_file(deck_path);
  for (const auto& kv : overrides) apply_override(deck, kv);
  SimState state = SimState::initialize(deck);
  for (const auto& w : state.warnings())
    std::cerr << "warning: " << w << "\n";
  fs::create_directories(deck.run.out_dir);
  const fs::path csv_path = fs::path(deck.run.out_dir) / "diagnostics.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw run_abort("cannot open " + csv_path.string());
  state.run(&csv);
  std::cout << "ran " << state.step_count() << " steps, "
            << state.total_particles() << " particles; diagnostics in "
            << csv_path.string() << "\n";
  return 0;
}

std::string read_suite_name(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw run_abort("cannot open " + csv.string());
  std::string header, row;
  if (!std::getline(in, header) || !std::getline(in, row))
    throw usage_error("plot: bench CSV has no data rows");
  return row.substr(0, row.find(','));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minipic: a miniature performance-portable electromagnetic "
               "particle-in-cell engine"};
  app.require_subcommand(1);

  // run
  std::string deck_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "run a simulation deck");
  run->add_option("deck", deck_path, "deck file")->required();
  run->add_option("--set", overrides,
                  "override a deck key, e.g. --set run.layout=record_major");

  // bench
  auto* bench = app.add_subcommand("bench", "measurement suites");
  bench->require_subcommand(1);

  std::string grids_csv = "8,12,16,24,32";
  std::size_t particles = 200000;
  long steps = 10;
  int pr_workers = 1;
  std::string out_dir = "out";
  auto* pushrate =
      bench->add_subcommand("pushrate", "push rate vs grid size sweep");
  pushrate->add_option("--grids", grids_csv, "cubic grid edges, comma list");
  pushrate->add_option("--particles", particles, "total particle budget");
  pushrate->add_option("--steps", steps, "steps per repetition");
  pushrate->add_option("--workers", pr_workers, "worker threads");
  pushrate->add_option("--out", out_dir, "output directory");

  std::string mode = "strong";
  std::string workers_csv = "1";
  std::string base_deck_path;
  auto* scaling =
      bench->add_subcommand("scaling", "weak/strong scaling over workers");
  scaling->add_option("--mode", mode, "weak|strong")
      ->check(CLI::IsMember({"weak", "strong"}));
  scaling->add_option("--workers", workers_csv, "worker counts, comma list");
  scaling->add_option("--deck", base_deck_path, "base deck file")->required();
  scaling->add_option("--out", out_dir, "output directory");

  std::string matrix_deck_path;
  auto* matrix = bench->add_subcommand(
      "matrix", "layout x sort x backend correctness/performance matrix");
  matrix->add_option("--deck", matrix_deck_path, "base deck file")->required();
  matrix->add_option("--out", out_dir, "output directory");

  // plot
  std::string plot_csv, plot_out;
  auto* plot = app.add_subcommand("plot", "render a bench CSV to gnuplot");
  plot->add_option("csv", plot_csv, "bench CSV file")->required();
  plot->add_option("out", plot_out, "output gnuplot script")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(deck_path, overrides);

    if (pushrate->parsed()) {
      write_result(
          bench_pushrate(parse_int_list(grids_csv), particles, steps,
                         pr_workers),
          out_dir);
      return 0;
    }
    if (scaling->parsed()) {
      const Deck base = parse_deck_file(base_deck_path);
      const ScalingMode m =
          mode == "weak" ? ScalingMode::weak : ScalingMode::strong;
      write_result(bench_scaling(m, parse_int_list(workers_csv), base),
                   out_dir);
      return 0;
    }
    if (matrix->parsed()) {
      write_result(bench_matrix(parse_deck_file(matrix_deck_path)), out_dir);
      return 0;
    }
    if (plot->parsed()) {
      const std::string suite = read_suite_name(plot_csv);
      BenchResult stub{suite, {BenchRow{}}};
      emit_plotscript(stub, plot_csv, plot_out);
      std::cout << "wrote " << plot_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
