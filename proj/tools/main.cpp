// Command-line driver: single runs, table sweeps and field snapshots.
//
//   tgmfe run --config exp.cfg [--out DIR]
//   tgmfe table --id 5 [--out DIR] [--jobs N]
//   tgmfe snapshot --config exp.cfg --t 0.5 [--out DIR]
//
// Exit codes: 0 success, 1 solver failure, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>

#include "tgmfe/errors.hpp"
#include "tgmfe/experiment.hpp"

namespace fs = std::filesystem;
using namespace tgmfe;

namespace {

constexpr int kOk = 0;
constexpr int kSolverFailure = 1;
constexpr int kConfigError = 2;

fs::path cache_dir(const fs::path& out, const std::string& flag) {
  return flag.empty() ? out / ".reference-cache" : fs::path(flag);
}

void write_csv(const fs::path& file, const std::vector<CsvRecord>& rows) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream f(file, std::ios::trunc);
  f << csv_header() << '\n';
  for (const auto& r : rows) f << format_csv_row(r) << '\n';
  if (!f) throw std::runtime_error("cannot write " + file.string());
}

int cmd_run(const fs::path& config, const fs::path& out, const std::string& cache_flag) {
  const ExperimentConfig cfg = load_config(config);
  ReferenceCache cache(cache_dir(out, cache_flag));
  const ExperimentResult res = run_experiment(cfg, ExperimentOptions{out, &cache});
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  write_csv(out / cfg.output, {res.record});
  std::cout << csv_header() << '\n' << format_csv_row(res.record) << '\n';
  for (const auto& s : res.snapshots) std::cerr << "wrote " << s.string() << '\n';
  if (!res.record.failure.empty()) {
    std::cerr << "error: " << res.record.failure << '\n';
    return kSolverFailure;
  }
  return kOk;
}

int cmd_table(int id, const fs::path& out, int jobs, const std::string& cache_flag) {
  const auto rows = table_manifest(id);
  ReferenceCache cache(cache_dir(out, cache_flag));
  std::mutex io;
  TableOptions opts;
  opts.jobs = jobs;
  opts.cache = &cache;
  opts.progress = [&](std::size_t i, const CsvRecord& r) {
    std::lock_guard lock(io);
    std::cerr << "[" << i + 1 << "/" << rows.size() << "] " << format_csv_row(r) << '\n';
    if (!r.failure.empty()) std::cerr << "  failed: " << r.failure << '\n';
  };
  const auto records = run_table(rows, opts);
  const fs::path file = out / ("table" + std::to_string(id) + ".csv");
  write_csv(file, records);
  std::cout << file.string() << '\n';
  for (const auto& r : records) {
    if (!r.failure.empty()) return kSolverFailure;
  }
  return kOk;
}

int cmd_snapshot(const fs::path& config, double t, const fs::path& out) {
  ExperimentConfig cfg = load_config(config);
  const auto scheme = ThetaScheme::for_final_time(cfg.theta, cfg.dt, final_time(cfg));
  if (!(t >= 0.0 && t <= scheme.final_time() * (1.0 + 1e-12))) {
    throw ConfigError("--t", 0, "t", "time is outside [0, T]");
  }
  bool snapped = false;
  const int n = snap_to_level(scheme, t, &snapped);
  if (snapped) std::cerr << "warning: t = " << t << " is not on the time grid; using t = " << scheme.time(n) << '\n';

  const std::string stem = fs::path(cfg.output).stem().string();
  if (n == 0) {
    const ProblemSpec problem = make_problem(cfg.problem, cfg.gamma);
    const SpacePtr space = make_space(make_uniform_mesh(problem.domain, cfg.fine_div));
    const StepState st = init_state(space, problem, cfg.solver);
    fs::create_directories(out);
    for (const char* field : {"u", "sigma"}) {
      const fs::path file = out / (stem + "_" + field + "_t0.grid");
      std::ofstream f(file);
      write_grid(f, std::string(field) == "u" ? st.u : st.sigma, field, 0.0);
      std::cout << file.string() << '\n';
    }
    return kOk;
  }

  cfg.final_time = scheme.time(n);
  cfg.snapshot_times = {scheme.time(n)};
  cfg.reference.reset();
  const ExperimentResult res = run_experiment(cfg, ExperimentOptions{out, nullptr});
  for (const auto& s : res.snapshots) std::cout << s.string() << '\n';
  if (!res.record.failure.empty()) {
    std::cerr << "error: " << res.record.failure << '\n';
    return kSolverFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed finite elements and a two-grid solver for u_t + gamma*Lap^2 u - Lap u + f(u) = g"};
  app.require_subcommand(1);

  std::string config;
  std::string out = ".";
  std::string cache;
  int table_id = 0;
  int jobs = 1;
  double time = 0.0;

  auto* run = app.add_subcommand("run", "Run one experiment and write a CSV record");
  run->add_option("--config", config, "Experiment file (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory");
  run->add_option("--cache", cache, "Reference cache directory (default OUT/.reference-cache)");

  auto* table = app.add_subcommand("table", "Reproduce a convergence table as CSV");
  table->add_option("--id", table_id, "Table number")->required()->check(CLI::Range(1, 9));
  table->add_option("--out", out, "Output directory");
  table->add_option("--jobs", jobs, "Rows run concurrently")->check(CLI::PositiveNumber);
  table->add_option("--cache", cache, "Reference cache directory (default OUT/.reference-cache)");

  auto* snap = app.add_subcommand("snapshot", "Write nodal grids of U_h and Sigma_h at one time");
  snap->add_option("--config", config, "Experiment file (key = value)")->required()->check(CLI::ExistingFile);
  snap->add_option("--t", time, "Snapshot time")->required();
  snap->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(config, out, cache);
    if (table->parsed()) return cmd_table(table_id, out, jobs, cache);
    return cmd_snapshot(config, time, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
}
