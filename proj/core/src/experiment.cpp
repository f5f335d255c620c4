#include "tgmfe/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "tgmfe/analysis.hpp"
#include "tgmfe/errors.hpp"

namespace tgmfe {

namespace {

std::string describe(const std::string& source, int line, const std::string& field, const std::string& message) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ':' << line;
  os << ": ";
  if (!field.empty()) os << "field '" << field << "': ";
  os << message;
  return os.str();
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_plain(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (used != s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// A decimal number or a/b.
std::optional<double> parse_number(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_plain(s);
  const auto num = parse_plain(trim(std::string_view(s).substr(0, slash)));
  const auto den = parse_plain(trim(std::string_view(s).substr(slash + 1)));
  if (!num || !den || *den == 0.0) return std::nullopt;
  return *num / *den;
}

std::optional<int> parse_int(const std::string& s) {
  const auto v = parse_plain(s);
  if (!v || *v != std::floor(*v) || std::fabs(*v) > 1e9) return std::nullopt;
  return static_cast<int>(*v);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string format_sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "problem",    "gamma",           "theta",  "dt",     "T",
      "method",     "coarse_div",      "fine_div", "newton_tol", "newton_max",
      "linear_tol", "linear_max_iter", "source", "output", "reference_method",
      "reference_fine_div", "reference_coarse_div", "reference_dt", "snapshot_times"};
  return keys;
}

std::string source_name(SourceSampling s) { return s == SourceSampling::Shifted ? "shifted" : "theta_combined"; }

}  // namespace

ConfigError::ConfigError(std::string source, int line, std::string field, const std::string& message)
    : std::runtime_error(describe(source, line, field, message)),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;
  std::optional<ReferenceSpec> ref;
  auto reference = [&]() -> ReferenceSpec& {
    if (!ref) ref.emplace();
    return *ref;
  };

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line_no, "", "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(source, line_no, "", "missing key before '='");
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
      throw ConfigError(source, line_no, key, "unknown key");
    }
    if (const auto it = seen.find(key); it != seen.end()) {
      throw ConfigError(source, line_no, key, "repeated key (first set on line " + std::to_string(it->second) + ")");
    }
    seen[key] = line_no;
    if (value.empty() && key != "snapshot_times") throw ConfigError(source, line_no, key, "missing value");

    auto number = [&]() {
      const auto v = parse_number(value);
      if (!v) throw ConfigError(source, line_no, key, "expected a number, got '" + value + "'");
      return *v;
    };
    auto integer = [&]() {
      const auto v = parse_int(value);
      if (!v) throw ConfigError(source, line_no, key, "expected an integer, got '" + value + "'");
      return *v;
    };
    auto method = [&]() {
      try {
        return parse_method(value);
      } catch (const InvalidArgument& e) {
        throw ConfigError(source, line_no, key, e.what());
      }
    };

    if (key == "problem") {
      cfg.problem = value;
    } else if (key == "gamma") {
      cfg.gamma = number();
    } else if (key == "theta") {
      cfg.theta = number();
    } else if (key == "dt") {
      cfg.dt = number();
    } else if (key == "T") {
      cfg.final_time = number();
    } else if (key == "method") {
      cfg.method = method();
    } else if (key == "coarse_div") {
      cfg.coarse_div = integer();
    } else if (key == "fine_div") {
      cfg.fine_div = integer();
    } else if (key == "newton_tol") {
      cfg.solver.newton_tol = number();
    } else if (key == "newton_max") {
      cfg.solver.newton_max = integer();
    } else if (key == "linear_tol") {
      cfg.solver.linear_tol = number();
    } else if (key == "linear_max_iter") {
      cfg.solver.linear_max_iter = integer();
    } else if (key == "source") {
      if (value == "theta_combined") {
        cfg.solver.source = SourceSampling::ThetaCombined;
      } else if (value == "shifted") {
        cfg.solver.source = SourceSampling::Shifted;
      } else {
        throw ConfigError(source, line_no, key, "expected 'theta_combined' or 'shifted'");
      }
    } else if (key == "output") {
      cfg.output = value;
    } else if (key == "reference_method") {
      reference().method = method();
    } else if (key == "reference_fine_div") {
      reference().fine_div = integer();
    } else if (key == "reference_coarse_div") {
      reference().coarse_div = integer();
    } else if (key == "reference_dt") {
      reference().dt = number();
    } else if (key == "snapshot_times") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto v = parse_number(trim(item));
        if (!v) throw ConfigError(source, line_no, key, "expected a comma-separated list of times");
        cfg.snapshot_times.push_back(*v);
      }
    }
  }

  for (const char* required : {"problem", "dt", "fine_div"}) {
    if (!seen.contains(required)) throw ConfigError(source, 0, required, "required key is missing");
  }
  cfg.reference = ref;
  validate(cfg, source);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "", "cannot open file");
  return parse_config(in, path.string());
}

double final_time(const ExperimentConfig& cfg) {
  if (cfg.final_time) return *cfg.final_time;
  return make_problem(cfg.problem, cfg.gamma).final_time;
}

double edge_length(const ExperimentConfig& cfg, int divisions) {
  return make_problem(cfg.problem, cfg.gamma).domain.axis(0).length() / divisions;
}

void validate(const ExperimentConfig& cfg, const std::string& source) {
  const auto& ids = builtin_problem_ids();
  if (std::find(ids.begin(), ids.end(), cfg.problem) == ids.end()) {
    throw ConfigError(source, 0, "problem", "unknown problem '" + cfg.problem + "'");
  }
  if (!(cfg.gamma > 0.0)) throw ConfigError(source, 0, "gamma", "must be positive");
  if (!(cfg.theta >= 0.0 && cfg.theta <= 0.5)) throw ConfigError(source, 0, "theta", "must lie in [0, 1/2]");
  if (!(cfg.dt > 0.0)) throw ConfigError(source, 0, "dt", "must be positive");
  if (cfg.final_time && !(*cfg.final_time > 0.0)) throw ConfigError(source, 0, "T", "must be positive");
  const double t_end = final_time(cfg);
  try {
    (void)ThetaScheme::for_final_time(cfg.theta, cfg.dt, t_end);
  } catch (const InvalidArgument& e) {
    throw ConfigError(source, 0, "dt", e.what());
  }
  if (cfg.fine_div < 1) throw ConfigError(source, 0, "fine_div", "must be at least 1");
  if (cfg.method == Method::Tgmfe && cfg.coarse_div < 1) {
    throw ConfigError(source, 0, "coarse_div", "tgmfe needs a coarse grid");
  }
  try {
    validate(cfg.solver);
  } catch (const InvalidArgument& e) {
    throw ConfigError(source, 0, "solver", e.what());
  }
  if (cfg.reference) {
    const auto& r = *cfg.reference;
    if (r.fine_div < 1) throw ConfigError(source, 0, "reference_fine_div", "must be at least 1");
    if (r.method == Method::Tgmfe && r.coarse_div < 1) {
      throw ConfigError(source, 0, "reference_coarse_div", "tgmfe reference needs a coarse grid");
    }
    const double rdt = r.dt > 0.0 ? r.dt : cfg.dt;
    try {
      (void)ThetaScheme::for_final_time(cfg.theta, rdt, t_end);
    } catch (const InvalidArgument& e) {
      throw ConfigError(source, 0, "reference_dt", e.what());
    }
  }
  for (double t : cfg.snapshot_times) {
    if (!(t >= 0.0 && t <= t_end * (1.0 + 1e-12))) {
      throw ConfigError(source, 0, "snapshot_times", "time " + format_short(t) + " is outside [0, T]");
    }
  }
  if (cfg.output.empty()) throw ConfigError(source, 0, "output", "must not be empty");
}

std::string serialize(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "problem = " << cfg.problem << '\n'
     << "gamma = " << format_double(cfg.gamma) << '\n'
     << "theta = " << format_double(cfg.theta) << '\n'
     << "dt = " << format_double(cfg.dt) << '\n';
  if (cfg.final_time) os << "T = " << format_double(*cfg.final_time) << '\n';
  os << "method = " << to_string(cfg.method) << '\n';
  if (cfg.method == Method::Tgmfe || cfg.coarse_div > 0) os << "coarse_div = " << cfg.coarse_div << '\n';
  os << "fine_div = " << cfg.fine_div << '\n'
     << "newton_tol = " << format_double(cfg.solver.newton_tol) << '\n'
     << "newton_max = " << cfg.solver.newton_max << '\n'
     << "linear_tol = " << format_double(cfg.solver.linear_tol) << '\n'
     << "linear_max_iter = " << cfg.solver.linear_max_iter << '\n'
     << "source = " << source_name(cfg.solver.source) << '\n'
     << "output = " << cfg.output << '\n';
  if (cfg.reference) {
    const auto& r = *cfg.reference;
    os << "reference_method = " << to_string(r.method) << '\n' << "reference_fine_div = " << r.fine_div << '\n';
    if (r.method == Method::Tgmfe || r.coarse_div > 0) os << "reference_coarse_div = " << r.coarse_div << '\n';
    if (r.dt > 0.0) os << "reference_dt = " << format_double(r.dt) << '\n';
  }
  if (!cfg.snapshot_times.empty()) {
    os << "snapshot_times = ";
    for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
      os << (i ? ", " : "") << format_double(cfg.snapshot_times[i]);
    }
    os << '\n';
  }
  return os.str();
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

const std::string& csv_header() {
  static const std::string h =
      "method,problem,gamma,theta,dt,H_hat,h_hat,err_u,order_u,err_sigma,order_sigma,cpu_seconds,newton_total_iters";
  return h;
}

std::string format_csv_row(const CsvRecord& r) {
  auto opt = [](const std::optional<double>& v, auto fmt) { return v ? fmt(*v) : std::string(); };
  auto order = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", v);
    return std::string(buf);
  };
  const bool failed = !r.failure.empty();
  char cpu[32];
  std::snprintf(cpu, sizeof cpu, "%.4f", r.cpu_seconds);
  std::ostringstream os;
  os << to_string(r.method) << ',' << r.problem << ',' << format_short(r.gamma) << ',' << format_short(r.theta) << ','
     << format_short(r.dt) << ',' << opt(r.coarse_edge, format_short) << ',' << format_short(r.fine_edge) << ','
     << (failed ? "failed" : opt(r.err_u, format_sci)) << ',' << opt(r.order_u, order) << ','
     << (failed ? "failed" : opt(r.err_sigma, format_sci)) << ',' << opt(r.order_sigma, order) << ',' << cpu << ','
     << r.newton_total_iters;
  return os.str();
}

// ---------------------------------------------------------------------------
// Reference cache

namespace {

ExperimentConfig reference_run_config(const ExperimentConfig& cfg) {
  if (!cfg.reference) throw InvalidArgument("configuration has no reference run");
  ExperimentConfig r;
  r.problem = cfg.problem;
  r.gamma = cfg.gamma;
  r.theta = cfg.theta;
  r.final_time = final_time(cfg);
  r.solver = cfg.solver;
  r.method = cfg.reference->method;
  r.fine_div = cfg.reference->fine_div;
  r.coarse_div = r.method == Method::Tgmfe ? cfg.reference->coarse_div : 0;
  r.dt = cfg.reference->dt > 0.0 ? cfg.reference->dt : cfg.dt;
  r.output = "reference";
  return r;
}

SpacePtr space_for(const ProblemSpec& p, int divisions) { return make_space(make_uniform_mesh(p.domain, divisions)); }

std::optional<ReferenceCache::Entry> read_entry(const std::filesystem::path& file, const std::string& key,
                                                const SpacePtr& space) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line) || line != "# tgmfe reference") return std::nullopt;
  std::size_t key_lines = 0;
  if (!(in >> line >> key_lines) || line != "key_lines") return std::nullopt;
  std::getline(in, line);
  std::string stored;
  for (std::size_t i = 0; i < key_lines && std::getline(in, line); ++i) stored += line + '\n';
  if (stored != key) return std::nullopt;
  std::size_t nodes = 0;
  if (!(in >> line >> nodes) || line != "nodes" || nodes != space->num_nodes()) return std::nullopt;
  std::vector<double> u(nodes);
  std::vector<double> s(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    if (!(in >> u[i] >> s[i])) return std::nullopt;
  }
  return ReferenceCache::Entry{FeFunction(space, std::move(u)), FeFunction(space, std::move(s))};
}

void write_entry(const std::filesystem::path& file, const std::string& key, const ReferenceCache::Entry& e) {
  std::filesystem::create_directories(file.parent_path());
  const auto tmp = file.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp);
    const auto lines = static_cast<std::size_t>(std::count(key.begin(), key.end(), '\n'));
    out << "# tgmfe reference\nkey_lines " << lines << '\n' << key << "nodes " << e.u.coeffs().size() << '\n';
    out << std::setprecision(17);
    for (std::size_t i = 0; i < e.u.coeffs().size(); ++i) out << e.u.coeffs()[i] << ' ' << e.sigma.coeffs()[i] << '\n';
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace

struct ReferenceCache::Slot {
  std::once_flag once;
  std::shared_ptr<const Entry> entry;
  std::exception_ptr error;
};

ReferenceCache::ReferenceCache(std::optional<std::filesystem::path> directory) : directory_(std::move(directory)) {}

std::string ReferenceCache::key_text(const ExperimentConfig& cfg) { return serialize(reference_run_config(cfg)); }

std::shared_ptr<const ReferenceCache::Entry> ReferenceCache::get(const ExperimentConfig& cfg) {
  const ExperimentConfig ref = reference_run_config(cfg);
  const std::string key = serialize(ref);
  const std::uint64_t hash = fnv1a(key);
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(mutex_);
    auto& s = slots_[hash];
    if (!s) s = std::make_shared<Slot>();
    slot = s;
  }
  std::call_once(slot->once, [&]() {
    try {
      const ProblemSpec problem = make_problem(ref.problem, ref.gamma);
      const SpacePtr fine = space_for(problem, ref.fine_div);
      std::optional<std::filesystem::path> file;
      if (directory_) {
        char name[40];
        std::snprintf(name, sizeof name, "reference-%016llx.txt", static_cast<unsigned long long>(hash));
        file = *directory_ / name;
        if (auto e = read_entry(*file, key, fine)) {
          slot->entry = std::make_shared<const Entry>(std::move(*e));
          return;
        }
      }
      const SpacePtr coarse = ref.method == Method::Tgmfe ? space_for(problem, ref.coarse_div) : nullptr;
      const auto scheme = ThetaScheme::for_final_time(ref.theta, ref.dt, *ref.final_time);
      RunResult r = run(problem, scheme, ref.method, coarse, fine, ref.solver);
      if (!r.report.ok) throw SolverFailure("reference run failed: " + r.report.failure, 0.0);
      auto entry = std::make_shared<const Entry>(Entry{r.final_state.u, r.final_state.sigma});
      if (file) write_entry(*file, key, *entry);
      slot->entry = std::move(entry);
    } catch (...) {
      slot->error = std::current_exception();
    }
  });
  if (slot->error) std::rethrow_exception(slot->error);
  return slot->entry;
}

// ---------------------------------------------------------------------------
// Runs

int snap_to_level(const ThetaScheme& scheme, double t, bool* snapped) {
  const double x = t / scheme.dt();
  const int n = std::clamp(static_cast<int>(std::lround(x)), 0, scheme.num_steps());
  if (snapped != nullptr) *snapped = std::fabs(t - scheme.time(n)) > 1e-9 * std::max(1.0, std::fabs(t));
  return n;
}

void write_grid(std::ostream& out, const FeFunction& f, const std::string& field, double time) {
  const Mesh& mesh = f.space().mesh();
  const int dim = mesh.dim();
  const int nx = mesh.divisions(0);
  const int ny = dim == 2 ? mesh.divisions(1) : 0;
  out << "# tgmfe grid\nfield " << field << "\ntime " << format_short(time) << "\ndim " << dim << "\ndivisions " << nx;
  if (dim == 2) out << ' ' << ny;
  out << "\nbounds";
  for (int a = 0; a < dim; ++a) {
    out << ' ' << format_short(mesh.domain().axis(a).lower) << ' ' << format_short(mesh.domain().axis(a).upper);
  }
  out << '\n' << std::setprecision(10);
  const auto c = f.coeffs();
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      out << (i ? " " : "") << c[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx + 1) + static_cast<std::size_t>(i)];
    }
    out << '\n';
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentOptions& opts) {
  validate(cfg);
  ExperimentResult out;
  CsvRecord& rec = out.record;
  rec.method = cfg.method;
  rec.problem = cfg.problem;
  rec.gamma = cfg.gamma;
  rec.theta = cfg.theta;
  rec.dt = cfg.dt;
  rec.fine_edge = edge_length(cfg, cfg.fine_div);
  if (cfg.method == Method::Tgmfe) rec.coarse_edge = edge_length(cfg, cfg.coarse_div);

  const ProblemSpec problem = make_problem(cfg.problem, cfg.gamma);
  const auto scheme = ThetaScheme::for_final_time(cfg.theta, cfg.dt, final_time(cfg));
  const SpacePtr fine = space_for(problem, cfg.fine_div);
  const SpacePtr coarse = cfg.method == Method::Tgmfe ? space_for(problem, cfg.coarse_div) : nullptr;

  std::map<int, std::vector<double>> wanted;
  for (double t : cfg.snapshot_times) {
    bool snapped = false;
    const int n = snap_to_level(scheme, t, &snapped);
    if (snapped) {
      out.warnings.push_back("snapshot time " + format_short(t) + " is not on the time grid; using t = " +
                             format_short(scheme.time(n)));
    }
    wanted[n].push_back(t);
  }
  StepObserver observer;
  if (opts.snapshot_dir && !wanted.empty()) {
    std::filesystem::create_directories(*opts.snapshot_dir);
    const std::string stem = std::filesystem::path(cfg.output).stem().string();
    observer = [&](const StepState& st) {
      if (!wanted.contains(st.n)) return;
      const double t = scheme.time(st.n);
      for (const char* field : {"u", "sigma"}) {
        const auto file = *opts.snapshot_dir / (stem + "_" + field + "_t" + format_short(t) + ".grid");
        std::ofstream f(file);
        write_grid(f, std::string(field) == "u" ? st.u : st.sigma, field, t);
        out.snapshots.push_back(file);
      }
    };
  }

  RunResult result = run(problem, scheme, cfg.method, coarse, fine, cfg.solver, observer);
  out.report = result.report;
  rec.cpu_seconds = result.report.total.cpu;
  rec.newton_total_iters = result.report.newton_total();
  if (!result.report.ok) {
    rec.failure = result.report.failure;
    return out;
  }

  if (cfg.reference) {
    try {
      ReferenceCache local;
      ReferenceCache& cache = opts.cache != nullptr ? *opts.cache : local;
      const auto ref = cache.get(cfg);
      rec.err_u = reference_error(result.final_state.u, ref->u);
      rec.err_sigma = reference_error(result.final_state.sigma, ref->sigma);
    } catch (const std::exception& e) {
      rec.failure = e.what();
    }
  } else if (result.report.err_u) {
    rec.err_u = result.report.err_u;
    rec.err_sigma = result.report.err_sigma;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tables

namespace {

ExperimentConfig base_config(const std::string& problem, double gamma, double theta, double dt, Method m,
                             int coarse_div, int fine_div) {
  ExperimentConfig c;
  c.problem = problem;
  c.gamma = gamma;
  c.theta = theta;
  c.dt = dt;
  c.method = m;
  c.coarse_div = m == Method::Tgmfe ? coarse_div : 0;
  c.fine_div = fine_div;
  return c;
}

}  // namespace

std::vector<TableRow> table_manifest(int id) {
  std::vector<TableRow> rows;
  int sequence = 0;
  const std::array<Method, 2> methods{Method::Tgmfe, Method::Mfe};
  if (id >= 1 && id <= 4) {
    // example41 on [-1,1]^2 with dt = h_hat = H_hat^2.
    const double theta = std::array<double, 4>{0.2, 0.4, 0.0, 0.5}[static_cast<std::size_t>(id - 1)];
    const std::array<int, 3> inv_h{25, 64, 100};
    const std::array<int, 3> inv_coarse{5, 8, 10};
    for (Method m : methods) {
      for (double gamma : {0.01, 1.0, 10.0}) {
        for (std::size_t k = 0; k < inv_h.size(); ++k) {
          rows.push_back({base_config("example41", gamma, theta, 1.0 / inv_h[k], m, 2 * inv_coarse[k], 2 * inv_h[k]),
                          sequence, OrderBasis::Space});
        }
        ++sequence;
      }
    }
  } else if (id >= 5 && id <= 8) {
    // example42 on [0,1]^2 against an h_hat = 1/100, dt = 1/200 reference.
    const double theta = std::array<double, 4>{0.0, 0.1, 0.3, 0.5}[static_cast<std::size_t>(id - 5)];
    const std::array<int, 3> inv_h{9, 16, 25};
    const std::array<int, 3> inv_coarse{3, 4, 5};
    for (Method m : methods) {
      for (double gamma : {0.1, 20.0}) {
        for (std::size_t k = 0; k < inv_h.size(); ++k) {
          ExperimentConfig c = base_config("example42", gamma, theta, 1.0 / 200, m, inv_coarse[k], inv_h[k]);
          c.reference = ReferenceSpec{Method::Tgmfe, 100, 10, 1.0 / 200};
          rows.push_back({c, sequence, OrderBasis::Space});
        }
        ++sequence;
      }
    }
  } else if (id == 9) {
    // example43 on [-1,1]: temporal refinement on a fixed fine grid.
    struct Block {
      double theta;
      double gamma;
      int inv_coarse;
      int inv_h;
    };
    for (Method m : methods) {
      for (const Block& b : {Block{0.1, 1.0, 70, 4900}, Block{0.3, 10.0, 120, 14400}}) {
        for (int inv_dt : {5, 10, 20}) {
          rows.push_back({base_config("example43", b.gamma, b.theta, 1.0 / inv_dt, m, 2 * b.inv_coarse, 2 * b.inv_h),
                          sequence, OrderBasis::Time});
        }
        ++sequence;
      }
    }
  } else {
    throw InvalidArgument("table id must be in 1..9");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "table%d_row%02zu.csv", id, i + 1);
    rows[i].config.output = name;
  }
  return rows;
}

void compute_orders(const std::vector<TableRow>& rows, std::vector<CsvRecord>& records) {
  if (rows.size() != records.size()) throw InvalidArgument("rows and records differ in length");
  std::map<int, std::size_t> last;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CsvRecord& r = records[i];
    r.order_u.reset();
    r.order_sigma.reset();
    const auto it = last.find(rows[i].sequence);
    if (it != last.end()) {
      const CsvRecord& p = records[it->second];
      const bool space = rows[i].basis == OrderBasis::Space;
      const double hc = space ? p.fine_edge : p.dt;
      const double hf = space ? r.fine_edge : r.dt;
      auto order = [&](const std::optional<double>& ec, const std::optional<double>& ef) -> std::optional<double> {
        if (!ec || !ef || *ec <= 0.0 || *ef <= 0.0 || hc == hf) return std::nullopt;
        return convergence_order(*ec, *ef, hc, hf);
      };
      if (p.failure.empty() && r.failure.empty()) {
        r.order_u = order(p.err_u, r.err_u);
        r.order_sigma = order(p.err_sigma, r.err_sigma);
      }
    }
    last[rows[i].sequence] = i;
  }
}

std::vector<CsvRecord> run_table(const std::vector<TableRow>& rows, const TableOptions& opts) {
  std::vector<CsvRecord> records(rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        records[i] = run_experiment(rows[i].config, ExperimentOptions{std::nullopt, opts.cache}).record;
      } catch (const std::exception& e) {
        CsvRecord& r = records[i];
        r.method = rows[i].config.method;
        r.problem = rows[i].config.problem;
        r.gamma = rows[i].config.gamma;
        r.theta = rows[i].config.theta;
        r.dt = rows[i].config.dt;
        r.failure = e.what();
      }
      if (opts.progress) opts.progress(i, records[i]);
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  compute_orders(rows, records);
  return records;
}

}  // namespace tgmfe
