#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "penalise/measure.hpp"
#include "penalise/numerics.hpp"
#include "penalise/report.hpp"
#include "penalise/verify.hpp"

using namespace penalise;

namespace {

constexpr double kDecompositionTol = 1e-12;
constexpr double kBridgeIdentityTol = 1e-10;
constexpr double kPartialTol = 1e-12;
constexpr double kQuadratureRelTol = 1e-8;
constexpr double kLambdaRelTol = 1e-8;
constexpr double kLimitGapAt400 = 0.05;
constexpr double kZ = 3.0;
constexpr double kChi3Moment = 0.4535;
constexpr double kLocalEps = 0.05;
constexpr double kLocalFinal = 0.01;
constexpr std::size_t kCorpusSize = 20;
constexpr std::uint64_t kSeeds[] = {20240617, 1, 2, 3, 4};

struct Outcome {
  bool ok = true;
  std::string detail;
  std::size_t rows = 0;
};

const CheckResult& find(const std::vector<CheckResult>& rs, const std::string& id) {
  for (const auto& r : rs)
    if (r.id == id) return r;
  throw std::runtime_error("missing check " + id);
}

std::vector<const CheckRow*> rows_with(const CheckResult& r, const std::string& prefix) {
  std::vector<const CheckRow*> out;
  for (const auto& row : r.rows)
    if (row.quantity.rfind(prefix, 0) == 0) out.push_back(&row);
  return out;
}

double z_of(const CheckRow& row) { return (row.estimate - row.target) / row.stderr; }

// Every row with the prefix must exist (at least `min_count` of them) and
// satisfy the predicate.
bool all_rows(const CheckResult& r, const std::string& prefix, std::size_t min_count,
              const std::function<bool(const CheckRow&)>& pred, Outcome& o) {
  const auto rows = rows_with(r, prefix);
  o.rows += rows.size();
  bool ok = rows.size() >= min_count;
  if (!ok) o.detail += "[" + prefix + ": " + std::to_string(rows.size()) + " rows] ";
  for (const auto* row : rows) {
    if (!pred(*row)) {
      ok = false;
      o.detail += "[" + row->quantity + " = " + format_double(row->estimate) + "] ";
    }
  }
  o.ok = o.ok && ok;
  return ok;
}

Outcome algebra(const std::vector<CheckResult>& rs) {
  Outcome o;
  all_rows(find(rs, "decomposition_additivity"), "max |whole - (j1 + j2)| / scale", 1,
           [](const CheckRow& r) { return r.estimate <= kDecompositionTol; }, o);
  all_rows(find(rs, "decomposition_additivity"), "max bridge identity residual", 1,
           [](const CheckRow& r) { return r.estimate <= kBridgeIdentityTol; }, o);
  all_rows(find(rs, "bridge_isometry"), "identity residual", 4,
           [](const CheckRow& r) { return r.estimate <= kBridgeIdentityTol; }, o);
  all_rows(find(rs, "partial_integral_consistency"), "max |I_t - I_t' - int_[t',t) f dX| / scale", 1,
           [](const CheckRow& r) { return r.estimate <= kPartialTol; }, o);
  return o;
}

Outcome quadrature() {
  using numerics::Integrand1D;
  Outcome o;
  const double pi = std::numbers::pi;
  const double arcsine = numerics::integrate_singular(
      Integrand1D{[](double u) { return 1.0 / std::sqrt(u * (1.0 - u)); }, {}, {}}, 0.0, 1.0, true, true);
  const double gauss =
      numerics::integrate_half_line(Integrand1D{[](double u) { return std::exp(-u) / std::sqrt(u); }, {}, {}}, true).value;
  const double e1 = std::abs(arcsine - pi) / pi, e2 = std::abs(gauss - std::sqrt(pi)) / std::sqrt(pi);
  double e3 = 0.0;
  for (auto [x, T] : {std::pair{0.0, 1.0}, {1.0, 1.0}, {0.5, 0.25}, {2.0, 3.0}, {-0.1, 2.0}}) {
    const double closed = lambda_tail_closed(x, T);
    e3 = std::max(e3, std::abs(lambda_tail_quadrature(x, T) - closed) / closed);
  }
  o.ok = e1 <= kQuadratureRelTol && e2 <= kQuadratureRelTol && e3 <= kLambdaRelTol;
  o.detail = "pi rel " + format_double(e1) + ", sqrt(pi) rel " + format_double(e2) + ", Lambda rel " + format_double(e3);
  return o;
}

Outcome limit_theorem() {
  const auto tilt = numerics::TiltingConfig::exponential_weight();
  Outcome o;
  double prev = INFINITY;
  for (double t : {25.0, 100.0, 400.0}) {
    const double gap = std::abs(numerics::limit_ratio(tilt.phi, t) - std::sqrt(std::numbers::pi));
    o.ok = o.ok && gap < prev;
    o.detail += "t=" + format_double(t) + " gap " + format_double(gap) + " ";
    prev = gap;
  }
  o.ok = o.ok && prev <= kLimitGapAt400;
  return o;
}

Outcome norm_equivalence(const std::vector<CheckResult>& rs) {
  Outcome o;
  const CheckResult& ne = find(rs, "norm_equivalence");
  all_rows(ne, "phi_norm / l1_one_plus_sqrt in", kCorpusSize, [](const CheckRow& r) { return r.estimate == 1.0; }, o);
  all_rows(ne, "0 < c0 <= C0 < inf", 1, [](const CheckRow& r) { return r.estimate == 1.0; }, o);
  const CheckResult& ce = find(rs, "counterexample_classification");
  all_rows(ce, "l2 finite", 1, [](const CheckRow& r) { return r.estimate == 1.0; }, o);
  all_rows(ce, "l1_sqrt infinite", 1, [](const CheckRow& r) { return r.estimate == 1.0; }, o);
  for (const auto& [k, v] : ne.metrics)
    if (k == "c0" || k == "C0") o.detail += k + " " + format_double(v) + " ";
  return o;
}

Outcome isometries(const std::vector<CheckResult>& rs) {
  Outcome o;
  const auto within = [](const CheckRow& r) { return std::abs(z_of(r)) <= kZ; };
  all_rows(find(rs, "bm_isometry"), "E[(int f", 5, within, o);
  all_rows(find(rs, "bridge_isometry"), "E[I^2]", 4, within, o);
  all_rows(find(rs, "bridge_isometry"), "E[I^2] f=[[0.5,1.0]] u=1", 1,
           [&](const CheckRow& r) { return r.target == 0.25 && within(r); }, o);
  all_rows(find(rs, "bridge_isometry"), "excess kurtosis", 4,
           [&](const CheckRow& r) { return r.target == 0.0 && within(r); }, o);
  return o;
}

Outcome bessel(const std::vector<CheckResult>& rs) {
  Outcome o;
  const CheckResult& b = find(rs, "bessel_moments");
  const double pi = std::numbers::pi;
  for (double t : {1.0, 4.0}) {
    const std::string ts = t == 1.0 ? "1" : "4";
    all_rows(b, "E[1/X_" + ts + "]", 1, [&](const CheckRow& r) {
      return std::abs(r.target - std::sqrt(2.0 / (pi * t))) < 1e-15 && std::abs(z_of(r)) <= kZ;
    }, o);
    all_rows(b, "E[X_" + ts + "]", 1, [&](const CheckRow& r) {
      return std::abs(r.target - 2.0 * std::sqrt(2.0 * t / pi)) < 1e-14 && std::abs(z_of(r)) <= kZ;
    }, o);
  }
  return o;
}

Outcome convex_domination(const std::vector<CheckResult>& rs) {
  Outcome o;
  const CheckResult& f = find(rs, "convex_domination");
  all_rows(f, "BES - BM moment", 15, [](const CheckRow& r) { return r.target == 0.0 && r.estimate <= kZ * r.stderr; }, o);
  all_rows(f, "centered BES x^2-moment f=1_[0,1)", 1, [](const CheckRow& r) {
    return std::abs(r.estimate - kChi3Moment) <= kZ * r.stderr && r.estimate < 1.0;
  }, o);
  return o;
}

Outcome tilted(const std::vector<CheckResult>& rs) {
  Outcome o;
  const CheckResult& t = find(rs, "tilted_marginal_ks");
  all_rows(t, "KS statistic", 1, [&](const CheckRow& r) {
    o.detail += "D " + format_double(r.estimate) + " < " + format_double(r.target) + " ";
    return r.estimate < r.target;
  }, o);
  all_rows(t, "E[u]", 1, [](const CheckRow& r) { return r.target == 0.5 && std::abs(z_of(r)) <= kZ; }, o);
  return o;
}

Outcome lambda(const std::vector<CheckResult>& rs) {
  Outcome o;
  const CheckResult& l = find(rs, "lambda_cross_check");
  all_rows(l, "W-side E_W[F Lambda_1] vs mu-side", 3, [](const CheckRow& r) { return r.verdict == Verdict::pass; }, o);
  all_rows(l, "allowance growth under dt halving", 3, [](const CheckRow& r) { return r.estimate < 0.0; }, o);
  for (const auto& [k, v] : l.metrics)
    if (k.find("rate") != std::string::npos) o.detail += k + " " + format_double(v) + " ";
  return o;
}

Outcome local_convergence(const std::vector<CheckResult>& rs) {
  Outcome o;
  const CheckResult& lc = find(rs, "local_convergence");
  std::vector<double> p;
  for (int L = 2; L <= 7; ++L) {
    const auto rows = rows_with(lc, "P(|I(f_" + std::to_string(L) + ") - I(f_8)| >= eps)");
    if (rows.empty()) {
      o.ok = false;
      o.detail += "missing L=" + std::to_string(L) + " ";
      return o;
    }
    p.push_back(rows.front()->estimate);
  }
  // paired differences must not increase beyond sampling error
  all_rows(lc, "P(L=", 5, [](const CheckRow& r) { return r.estimate <= kZ * r.stderr; }, o);
  o.ok = o.ok && p.back() < kLocalFinal;
  o.detail += "P(L=2) " + format_double(p.front()) + ", P(L=7) " + format_double(p.back());
  return o;
}

Outcome reproducibility(const SuiteConfig& base, const std::vector<CheckResult>& first) {
  Outcome o;
  const auto second = run_suite(base);
  const bool same = report_json(first, base) == report_json(second, base) && report_csv(first) == report_csv(second);
  o.detail += same ? "byte-identical reports; " : "reports differ; ";
  o.ok = same;

  // A verdict is stable when no check fails on any seed and every seed's
  // suite exit code is 0; isolated warns are listed, not hidden.
  for (std::uint64_t seed : kSeeds) {
    SuiteConfig cfg = base;
    cfg.seed = seed;
    const auto rs = seed == base.seed ? first : run_suite(cfg);
    for (const auto& r : rs) {
      if (r.verdict == Verdict::fail) o.ok = false;
      if (r.verdict != Verdict::pass)
        o.detail += "seed " + std::to_string(seed) + " " + r.id + " " + to_string(r.verdict) + "; ";
    }
    if (exit_code(rs) != 0) {
      o.ok = false;
      o.detail += "seed " + std::to_string(seed) + " suite exit " + std::to_string(exit_code(rs)) + "; ";
    }
  }
  o.detail += "verdicts compared over " + std::to_string(std::size(kSeeds)) + " seeds";
  return o;
}

}  // namespace

int main() {
  const SuiteConfig cfg;
  const auto results = run_suite(cfg);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"deterministic algebra", [&] { return algebra(results); }},
      {"quadrature oracles", [] { return quadrature(); }},
      {"limit theorem", [] { return limit_theorem(); }},
      {"norm equivalence", [&] { return norm_equivalence(results); }},
      {"isometries", [&] { return isometries(results); }},
      {"Bessel moments", [&] { return bessel(results); }},
      {"convex-moment domination", [&] { return convex_domination(results); }},
      {"tilted sampler", [&] { return tilted(results); }},
      {"absolute-continuity cross-check", [&] { return lambda(results); }},
      {"local convergence", [&] { return local_convergence(results); }},
      {"reproducibility", [&] { return reproducibility(cfg, results); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, e.what()};
    }
    if (o.rows > 0) o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(o.rows) + " rows checked";
    failures += o.ok ? 0 : 1;
    std::printf("%s  %2zu %s: %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
