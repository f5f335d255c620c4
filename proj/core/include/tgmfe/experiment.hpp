#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tgmfe/msolve.hpp"

namespace tgmfe {

/// Malformed experiment configuration. `line` is 0 when the problem is not
/// tied to one line (missing key, cross-field check).
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string source, int line, std::string field, const std::string& message);

  const std::string& source() const { return source_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

private:
  std::string source_;
  int line_;
  std::string field_;
};

/// Run compared against a finer numerical solution instead of an exact one.
struct ReferenceSpec {
  Method method = Method::Tgmfe;
  int fine_div = 0;
  int coarse_div = 0;
  double dt = 0.0;
};

struct ExperimentConfig {
  std::string problem = "example41";
  double gamma = 1.0;
  double theta = 0.2;
  double dt = 0.0;
  /// Defaults to the problem's final time.
  std::optional<double> final_time;
  Method method = Method::Tgmfe;
  /// Divisions per axis; coarse_div is only read for tgmfe.
  int coarse_div = 0;
  int fine_div = 0;
  SolverConfig solver;
  /// CSV file written by cmd_run, relative to the output directory.
  std::string output = "run.csv";
  std::optional<ReferenceSpec> reference;
  std::vector<double> snapshot_times;
};

/// Reads the key = value format:
///
///     # comment
///     problem = example42
///     gamma = 0.1
///     dt = 1/200            # numbers may be written as a/b
///     method = tgmfe
///     coarse_div = 3
///     fine_div = 9
///     reference_fine_div = 100
///     snapshot_times = 0.5, 1
///
/// Keys: problem gamma theta dt T method coarse_div fine_div newton_tol
/// newton_max linear_tol linear_max_iter source output reference_method
/// reference_fine_div reference_coarse_div reference_dt snapshot_times.
/// Unknown or repeated keys are errors. Throws ConfigError.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Cross-field checks (problem id, θ range, integral step count, coarse
/// grid for tgmfe, snapshot times inside [0, T]). Throws ConfigError.
void validate(const ExperimentConfig& cfg, const std::string& source = "<config>");

/// Canonical key = value text; parse_config(serialize(c)) reproduces c.
std::string serialize(const ExperimentConfig& cfg);

std::uint64_t fnv1a(std::string_view bytes);

/// Mesh edge length for `divisions` cells per axis on the problem's domain.
double edge_length(const ExperimentConfig& cfg, int divisions);
double final_time(const ExperimentConfig& cfg);

/// One line of the results CSV.
struct CsvRecord {
  Method method = Method::Mfe;
  std::string problem;
  double gamma = 0.0;
  double theta = 0.0;
  double dt = 0.0;
  std::optional<double> coarse_edge;
  double fine_edge = 0.0;
  std::optional<double> err_u;
  std::optional<double> order_u;
  std::optional<double> err_sigma;
  std::optional<double> order_sigma;
  double cpu_seconds = 0.0;
  int newton_total_iters = 0;
  /// Empty on success; failed rows print "failed" in the error columns.
  std::string failure;
};

const std::string& csv_header();
std::string format_csv_row(const CsvRecord& r);

/// Final-time reference solutions keyed by a hash of the reference run's
/// parameters. Values live in memory and, when a directory is set, in one
/// text file per key so later processes reuse them. Thread safe: concurrent
/// requests for one key compute it once.
class ReferenceCache {
public:
  explicit ReferenceCache(std::optional<std::filesystem::path> directory = std::nullopt);

  struct Entry {
    FeFunction u;
    FeFunction sigma;
  };

  /// The reference pair of `cfg`, computed on first use.
  std::shared_ptr<const Entry> get(const ExperimentConfig& cfg);
  static std::string key_text(const ExperimentConfig& cfg);

private:
  struct Slot;
  std::optional<std::filesystem::path> directory_;
  std::mutex mutex_;
  std::map<std::uint64_t, std::shared_ptr<Slot>> slots_;
};

struct ExperimentResult {
  CsvRecord record;
  RunReport report;
  /// Snapshot files written during the run.
  std::vector<std::filesystem::path> snapshots;
  /// Non-fatal notes, e.g. snapshot times moved to the nearest level.
  std::vector<std::string> warnings;
};

struct ExperimentOptions {
  /// Directory for snapshot files; none are written when unset.
  std::optional<std::filesystem::path> snapshot_dir;
  /// Reference cache used for configs with a reference run.
  ReferenceCache* cache = nullptr;
};

/// Runs one configuration. Solver failures are reported through
/// record.failure, never thrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentOptions& opts = {});

/// Nearest time level to t; `snapped` is set when t is not on the grid.
int snap_to_level(const ThetaScheme& scheme, double t, bool* snapped = nullptr);

/// Plain-text nodal grid:
///
///     # tgmfe grid
///     field u
///     time 0.5
///     dim 2
///     divisions 100 100
///     bounds 0 1 0 1
///     <one line per row of nodes, x fastest, bottom row first>
void write_grid(std::ostream& out, const FeFunction& f, const std::string& field, double time);

/// Convergence orders between consecutive successful rows of one sequence.
enum class OrderBasis { Space, Time };

struct TableRow {
  ExperimentConfig config;
  /// Rows with the same sequence form one refinement sequence.
  int sequence = 0;
  OrderBasis basis = OrderBasis::Space;
};

std::vector<TableRow> table_manifest(int id);
/// Fills order_u and order_sigma in place.
void compute_orders(const std::vector<TableRow>& rows, std::vector<CsvRecord>& records);

struct TableOptions {
  int jobs = 1;
  ReferenceCache* cache = nullptr;
  /// Called once per finished row from the worker that ran it.
  std::function<void(std::size_t, const CsvRecord&)> progress;
};

std::vector<CsvRecord> run_table(const std::vector<TableRow>& rows, const TableOptions& opts = {});

}  // namespace tgmfe
