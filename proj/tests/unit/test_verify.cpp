#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "penalise/report.hpp"
#include "penalise/verify.hpp"

using namespace penalise;

namespace {

CheckResult with_rows(std::initializer_list<Verdict> verdicts) {
  CheckResult r;
  for (Verdict v : verdicts) {
    CheckRow row;
    row.verdict = v;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace

TEST_CASE("check identifiers") {
  const auto& ids = check_ids();
  CHECK(ids.size() == 14);
  CHECK(std::find(ids.begin(), ids.end(), "lambda_cross_check") != ids.end());
  CHECK_THROWS_AS(run_check("no_such_check", SuiteConfig{}), std::invalid_argument);
}

TEST_CASE("exit code rules") {
  using enum Verdict;
  CHECK(exit_code({with_rows({pass, pass}), with_rows({pass})}) == 0);
  CHECK(exit_code({with_rows({pass, warn}), with_rows({pass})}) == 0);
  CHECK(exit_code({with_rows({warn}), with_rows({warn})}) != 0);
  CHECK(exit_code({with_rows({pass, fail})}) != 0);
  CHECK(exit_code({}) == 0);
}

TEST_CASE("small suite runs are reproducible and worker independent") {
  SuiteConfig cfg;
  cfg.n_paths = 2000;
  cfg.dt = 0x1.0p-6;
  cfg.horizon = 4.0;
  const std::vector<std::string> only{"bm_isometry", "bridge_isometry", "tilted_marginal_ks", "norm_equivalence"};
  const auto a = run_suite(cfg, only);
  cfg.workers = 2;
  const auto b = run_suite(cfg, only);
  REQUIRE(a.size() == only.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == only[i]);
    CHECK(a[i].reason.empty());
    CHECK(a[i].rows.size() == b[i].rows.size());
    CHECK(a[i].estimate == b[i].estimate);
    CHECK(a[i].stderr == b[i].stderr);
  }
  CHECK(report_json(a, cfg) == report_json(b, cfg));
  CHECK(report_csv(a) == report_csv(b));
}

TEST_CASE("deterministic checks pass on a tiny budget") {
  SuiteConfig cfg;
  cfg.n_paths = 100;
  for (const char* id : {"limit_ratio", "norm_equivalence", "counterexample_classification"}) {
    const CheckResult r = run_check(id, cfg);
    CHECK_MESSAGE(r.verdict == Verdict::pass, id);
    CHECK(r.kind == CheckKind::deterministic);
  }
}

TEST_CASE("convergence tables") {
  SuiteConfig cfg;
  cfg.n_paths = 2000;
  const auto rows = convergence_table("limit_ratio", cfg, {1.0, 10.0, 100.0});
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].level == 100.0);
  CHECK(std::abs(rows[2].bias_proxy) < std::abs(rows[0].bias_proxy));
  CHECK_THROWS_AS(convergence_table("convex_domination", cfg, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(convergence_table("nonsense", cfg, {1.0}), std::invalid_argument);
}

TEST_CASE("format_double round trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e10}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(std::nan("")) == "nan");
}
