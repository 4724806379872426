#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "penalise/measure.hpp"
#include "penalise/parallel.hpp"
#include "penalise/report.hpp"
#include "penalise/step_function.hpp"
#include "penalise/verify.hpp"
#include "penalise/wiener.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace penalise;

namespace {

struct RunConfig {
  std::string subcommand;
  fs::path out = "out";
  std::optional<std::size_t> n_paths;
  double dt = 0x1.0p-10;
  double horizon = 16.0;
  std::uint64_t seed = SuiteConfig{}.seed;
  unsigned workers = default_workers();
  std::vector<std::string> checks;
  Tolerances tol;
  std::string f = "[]";
  std::vector<double> t_grid;
  std::vector<double> levels;
  std::size_t dump_paths = 0;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::set<std::string> kKeys{
    "n_paths", "dt", "horizon", "seed", "workers", "checks", "z_pass", "z_warn",
    "local_convergence_eps", "algebra_tol", "identity_tol", "quadrature_tol", "f", "t_grid",
    "levels", "dump_paths"};

template <class T>
T get(const ordered_json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError("config key '" + key + "' has the wrong type");
  }
}

void apply_config_file(const fs::path& file, RunConfig& rc, bool& seed_set) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot read config " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ordered_json j;
  try {
    j = ordered_json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config parse error at byte " + std::to_string(e.byte));
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kKeys.count(key)) throw UsageError("unknown config key '" + key + "'");

  if (j.contains("n_paths")) rc.n_paths = get<std::size_t>(j, "n_paths");
  if (j.contains("dt")) rc.dt = get<double>(j, "dt");
  if (j.contains("horizon")) rc.horizon = get<double>(j, "horizon");
  if (j.contains("seed")) {
    rc.seed = get<std::uint64_t>(j, "seed");
    seed_set = true;
  }
  if (j.contains("workers")) rc.workers = get<unsigned>(j, "workers");
  if (j.contains("checks")) rc.checks = get<std::vector<std::string>>(j, "checks");
  if (j.contains("z_pass")) rc.tol.z_pass = get<double>(j, "z_pass");
  if (j.contains("z_warn")) rc.tol.z_warn = get<double>(j, "z_warn");
  if (j.contains("local_convergence_eps")) rc.tol.local_convergence_eps = get<double>(j, "local_convergence_eps");
  if (j.contains("algebra_tol")) rc.tol.algebra_tol = get<double>(j, "algebra_tol");
  if (j.contains("identity_tol")) rc.tol.identity_tol = get<double>(j, "identity_tol");
  if (j.contains("quadrature_tol")) rc.tol.quadrature_tol = get<double>(j, "quadrature_tol");
  if (j.contains("f")) rc.f = j.at("f").is_string() ? j.at("f").get<std::string>() : j.at("f").dump();
  if (j.contains("t_grid")) rc.t_grid = get<std::vector<double>>(j, "t_grid");
  if (j.contains("levels")) rc.levels = get<std::vector<double>>(j, "levels");
  if (j.contains("dump_paths")) rc.dump_paths = get<std::size_t>(j, "dump_paths");
}

void validate(const RunConfig& rc) {
  if (rc.n_paths && *rc.n_paths < 2) throw UsageError("n_paths must be at least 2");
  if (!(rc.dt > 0.0)) throw UsageError("dt must be positive");
  if (!(rc.horizon > 0.0) || !std::isfinite(rc.horizon)) throw UsageError("horizon must be positive");
  if (rc.workers == 0) throw UsageError("workers must be positive");
  if (!(rc.tol.z_pass > 0.0) || !(rc.tol.z_warn >= rc.tol.z_pass)) throw UsageError("need 0 < z_pass <= z_warn");
}

ordered_json echo(const RunConfig& rc, std::size_t n_paths) {
  ordered_json j;
  j["subcommand"] = rc.subcommand;
  j["n_paths"] = n_paths;
  j["dt"] = rc.dt;
  j["horizon"] = rc.horizon;
  j["seed"] = rc.seed;
  j["workers"] = rc.workers;
  j["checks"] = rc.checks;
  j["z_pass"] = rc.tol.z_pass;
  j["z_warn"] = rc.tol.z_warn;
  j["local_convergence_eps"] = rc.tol.local_convergence_eps;
  j["algebra_tol"] = rc.tol.algebra_tol;
  j["identity_tol"] = rc.tol.identity_tol;
  j["quadrature_tol"] = rc.tol.quadrature_tol;
  j["f"] = rc.f;
  j["t_grid"] = rc.t_grid;
  j["levels"] = rc.levels;
  j["dump_paths"] = rc.dump_paths;
  return j;
}

void prepare_out(const RunConfig& rc, std::size_t n_paths) {
  std::error_code ec;
  fs::create_directories(rc.out, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + rc.out.string() + ": " + ec.message());
  write_text(rc.out / "config.resolved.json", echo(rc, n_paths).dump(2) + "\n");
}

SuiteConfig suite_config(const RunConfig& rc) {
  SuiteConfig cfg;
  cfg.n_paths = rc.n_paths.value_or(cfg.n_paths);
  cfg.dt = rc.dt;
  cfg.horizon = rc.horizon;
  cfg.seed = rc.seed;
  cfg.tol = rc.tol;
  cfg.workers = rc.workers;
  return cfg;
}

std::string path_csv(const SamplePath& p) {
  std::string out = "time,value\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    out += format_double(p.grid[i]) + ',' + format_double(p.values[i]) + '\n';
  return out;
}

struct Lines {
  std::vector<std::string> rows;
  void merge(const Lines& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }
};

int cmd_simulate(const RunConfig& rc) {
  const std::size_t n = rc.n_paths.value_or(1000);
  prepare_out(rc, n);
  const auto tilt = numerics::TiltingConfig::exponential_weight();
  const TimeGrid grid = TimeGrid::uniform(rc.horizon, rc.dt);
  const Lines lines = run_chunked<Lines>(n, rc.workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    RandomStream rng({rc.seed, chunk});
    Lines out;
    for (std::size_t i = begin; i < end; ++i) {
      const TiltedSample s = sample_tilted(tilt, rc.horizon, grid, rng);
      const double g = last_exit(s.full, rc.horizon);
      out.rows.push_back(std::to_string(i) + ',' + format_double(s.u) + ',' + std::to_string(s.sign) + ',' +
                         format_double(g) + ',' + (g == s.u ? "1" : "0") + ',' + format_double(s.full.terminal()) +
                         '\n');
      if (i < rc.dump_paths) write_text(rc.out / ("path_" + std::to_string(i) + ".csv"), path_csv(s.full));
    }
    return out;
  });
  std::string csv = "path,u,sign,g_check,g_matches_u,x_horizon\n";
  for (const auto& row : lines.rows) csv += row;
  write_text(rc.out / "samples.csv", csv);
  std::cout << "wrote " << n << " samples to " << (rc.out / "samples.csv").string() << '\n';
  return 0;
}

int cmd_integrate(const RunConfig& rc) {
  const std::size_t n = rc.n_paths.value_or(1000);
  StepFunction f;
  try {
    f = StepFunction::from_json(rc.f);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("integrand: ") + e.what());
  }
  if (f.support_end() > rc.horizon) throw UsageError("integrand support exceeds the horizon");
  std::vector<double> t_grid = rc.t_grid;
  if (t_grid.empty()) t_grid = {0.0, f.support_end()};
  std::sort(t_grid.begin(), t_grid.end());
  t_grid.erase(std::unique(t_grid.begin(), t_grid.end()), t_grid.end());
  if (t_grid.front() < 0.0 || t_grid.back() > rc.horizon) throw UsageError("t grid must lie in [0, horizon]");
  if (t_grid.front() != 0.0) t_grid.insert(t_grid.begin(), 0.0);
  const TimeGrid tg = TimeGrid::from_times(t_grid);

  std::set<double> nodes;
  const TimeGrid uniform = TimeGrid::uniform(rc.horizon, rc.dt);
  for (double t : uniform.times()) nodes.insert(t);
  for (double t : f.right_ends()) nodes.insert(t);
  for (double t : t_grid) nodes.insert(t);
  const TimeGrid grid = TimeGrid::from_times({nodes.begin(), nodes.end()});

  prepare_out(rc, n);
  const auto tilt = numerics::TiltingConfig::exponential_weight();
  struct Out {
    Lines rows, traj;
    void merge(const Out& o) {
      rows.merge(o.rows);
      traj.merge(o.traj);
    }
  };
  const Out out = run_chunked<Out>(n, rc.workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    RandomStream rng({rc.seed, chunk});
    Out o;
    for (std::size_t i = begin; i < end; ++i) {
      const TiltedSample s = sample_tilted(tilt, rc.horizon, grid, rng);
      const Decomposition d = decompose_integral(f, s);
      const double residual = d.whole.value - (d.j1.value + d.j2.value);
      o.rows.rows.push_back(std::to_string(i) + ',' + format_double(s.u) + ',' + format_double(d.whole.value) + ',' +
                            format_double(d.j1.value) + ',' + format_double(d.j2.value) + ',' +
                            format_double(residual) + '\n');
      const auto I = partial_integrals(f, s, tg);
      for (std::size_t k = 0; k < I.size(); ++k)
        o.traj.rows.push_back(std::to_string(i) + ',' + format_double(tg[k]) + ',' + format_double(I[k].value) + '\n');
    }
    return o;
  });
  std::string rows = "path,u,whole,j1,j2,residual\n", traj = "path,t,I_t\n";
  for (const auto& r : out.rows.rows) rows += r;
  for (const auto& r : out.traj.rows) traj += r;
  write_text(rc.out / "integrals.csv", rows);
  write_text(rc.out / "trajectory.csv", traj);
  std::cout << "wrote " << n << " paths to " << (rc.out / "integrals.csv").string() << '\n';
  return 0;
}

int cmd_verify(const RunConfig& rc) {
  const SuiteConfig cfg = suite_config(rc);
  for (const auto& id : rc.checks)
    if (std::find(check_ids().begin(), check_ids().end(), id) == check_ids().end())
      throw UsageError("unknown check id: " + id);
  prepare_out(rc, cfg.n_paths);
  const auto results = run_suite(cfg, rc.checks);
  write_reports(rc.out, results, cfg);
  for (const auto& r : results) {
    std::cout << to_string(r.verdict) << "  " << r.id;
    if (!r.reason.empty()) std::cout << "  (" << r.reason << ")";
    std::cout << '\n';
  }
  const int code = exit_code(results);
  std::cout << "exit " << code << '\n';
  return code;
}

int cmd_table(const RunConfig& rc) {
  if (rc.checks.size() != 1) throw UsageError("table needs exactly one --check");
  const std::string& id = rc.checks.front();
  std::vector<double> levels = rc.levels;
  if (levels.empty()) {
    if (id == "limit_ratio")
      levels = {25.0, 100.0, 400.0};
    else
      levels = {6.0, 7.0, 8.0, 9.0, 10.0};
  }
  const SuiteConfig cfg = suite_config(rc);
  std::vector<TableRow> rows;
  try {
    rows = convergence_table(id, cfg, levels);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  prepare_out(rc, cfg.n_paths);
  write_text(rc.out / ("table_" + id + ".csv"), table_csv(rows));
  std::cout << table_csv(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and verification engine for Brownian last-exit decompositions"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_paths;
  std::optional<double> dt, horizon;
  std::optional<unsigned> workers;
  std::vector<std::string> checks;
  std::string f, f_file, t_grid, levels;
  std::optional<std::size_t> dump_paths;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON config file");
    sub->add_option("--out", rc.out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "root seed (falls back to PENALISE_SEED)");
    sub->add_option("--n-paths", n_paths, "Monte Carlo sample size");
    sub->add_option("--dt", dt, "grid step");
    sub->add_option("--horizon", horizon, "path horizon");
    sub->add_option("--workers", workers, "worker threads");
  };
  auto* simulate = app.add_subcommand("simulate", "sample paths from the tilted measure");
  common(simulate);
  simulate->add_option("--dump-paths", dump_paths, "write the first N full paths as CSV");
  auto* integrate = app.add_subcommand("integrate", "decompose Wiener integrals of a step function");
  common(integrate);
  integrate->add_option("--f", f, "step function as JSON, e.g. [[1.0, 1.0]]");
  integrate->add_option("--f-file", f_file, "file holding the step function JSON");
  integrate->add_option("--t-grid", t_grid, "comma-separated times for the I_t trajectory");
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  common(verify);
  verify->add_option("--check", checks, "run only these checks (repeatable)");
  auto* table = app.add_subcommand("table", "refinement table for one check");
  common(table);
  table->add_option("--check", checks, "check id: bm_isometry, arcsine or limit_ratio");
  table->add_option("--levels", levels, "comma-separated levels");

  CLI11_PARSE(app, argc, argv);

  auto parse_list = [](const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw UsageError("bad number '" + item + "'");
      }
    }
    return out;
  };

  try {
    rc.subcommand = app.get_subcommands().front()->get_name();
    bool seed_set = false;
    if (!config.empty()) apply_config_file(config, rc, seed_set);
    if (seed) {
      rc.seed = *seed;
    } else if (!seed_set) {
      if (const char* env = std::getenv("PENALISE_SEED")) {
        try {
          std::size_t used = 0;
          rc.seed = std::stoull(env, &used);
          if (env[used] != '\0') throw std::invalid_argument(env);
        } catch (const std::exception&) {
          throw UsageError("PENALISE_SEED is not an unsigned integer");
        }
      }
    }
    if (n_paths) rc.n_paths = *n_paths;
    if (dt) rc.dt = *dt;
    if (horizon) rc.horizon = *horizon;
    if (workers) rc.workers = *workers;
    if (!checks.empty()) rc.checks = checks;
    if (dump_paths) rc.dump_paths = *dump_paths;
    if (!f.empty()) rc.f = f;
    if (!f_file.empty()) {
      std::ifstream in(f_file);
      if (!in) throw UsageError("cannot read " + f_file);
      std::stringstream buf;
      buf << in.rdbuf();
      rc.f = buf.str();
    }
    if (!t_grid.empty()) rc.t_grid = parse_list(t_grid);
    if (!levels.empty()) rc.levels = parse_list(levels);
    validate(rc);

    if (rc.subcommand == "simulate") return cmd_simulate(rc);
    if (rc.subcommand == "integrate") return cmd_integrate(rc);
    if (rc.subcommand == "verify") return cmd_verify(rc);
    return cmd_table(rc);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
