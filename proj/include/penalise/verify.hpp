#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "penalise/numerics.hpp"

namespace penalise {

enum class Verdict { pass, warn, fail };
enum class CheckKind { statistical, deterministic };

const char* to_string(Verdict v);
const char* to_string(CheckKind k);

struct Tolerances {
  double z_pass = 3.0;
  double z_warn = 5.0;
  double local_convergence_eps = 0.05;
  double algebra_tol = 1e-12;
  double identity_tol = 1e-10;
  double quadrature_tol = 1e-8;
};

struct SuiteConfig {
  std::size_t n_paths = 100000;
  double dt = 0x1.0p-10;
  double horizon = 16.0;
  std::uint64_t seed = 20240617;
  numerics::TiltingConfig tilt = numerics::TiltingConfig::exponential_weight();
  Tolerances tol;
  unsigned workers = 1;
};

/// One compared quantity inside a check.
///   eq    estimate equals target within z_pass standard errors
///   le    estimate <= target + z_pass standard errors
///   true  a boolean condition (estimate 1 or 0)
/// Deterministic rows compare |estimate - target| or estimate - target
/// against `tolerance` and never warn.
struct CheckRow {
  std::string quantity;
  std::string relation;
  CheckKind kind = CheckKind::statistical;
  double estimate = 0.0;
  double stderr = 0.0;
  double target = 0.0;
  double z = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::pass;
  std::string note;
};

struct CheckResult {
  std::string id;
  std::string provenance;
  CheckKind kind = CheckKind::deterministic;
  // headline row: the one with the worst verdict, then the largest |z|
  std::string quantity;
  double target = 0.0;
  double estimate = 0.0;
  double stderr = 0.0;
  double z = 0.0;
  Verdict verdict = Verdict::pass;
  std::string reason;  // set when the check aborted
  std::size_t n_paths = 0;
  double grid_dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<CheckRow> rows;
  std::vector<std::pair<std::string, double>> metrics;
};

/// Check identifiers in suite order.
const std::vector<std::string>& check_ids();

/// Runs one check. Any exception inside the check is reported as a fail
/// with the message as reason. Throws std::invalid_argument for an unknown id.
CheckResult run_check(const std::string& id, const SuiteConfig& cfg);

/// Runs the given checks (all of them when `only` is empty) in suite order.
std::vector<CheckResult> run_suite(const SuiteConfig& cfg, const std::vector<std::string>& only = {});

/// 0 iff no row failed and at most one row in total is a warn.
int exit_code(const std::vector<CheckResult>& results);

struct TableRow {
  double level = 0.0;
  double estimate = 0.0;
  double stderr = 0.0;
  double bias_proxy = 0.0;
};

/// Refinement study. Supported ids:
///   bm_isometry  levels are k with dt = 2^-k; E[(int f dX)^2] on a uniform grid
///   arcsine      levels are k with dt = 2^-k; P(g_1 <= 1/2) vs 1/2
///   limit_ratio  levels are t; sqrt(t) K(t) vs C_phi
/// Throws std::invalid_argument for any other id.
std::vector<TableRow> convergence_table(const std::string& id, const SuiteConfig& cfg,
                                        const std::vector<double>& levels);

}  // namespace penalise
