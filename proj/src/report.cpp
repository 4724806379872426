#include "penalise/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace penalise {

using nlohmann::ordered_json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

// JSON has no literal for non-finite numbers; those are written as strings.
ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

ordered_json row_json(const CheckRow& row) {
  ordered_json j;
  j["quantity"] = row.quantity;
  j["relation"] = row.relation;
  j["kind"] = to_string(row.kind);
  j["estimate"] = number(row.estimate);
  j["stderr"] = number(row.stderr);
  j["target"] = number(row.target);
  j["z_score"] = number(row.z);
  j["tolerance"] = number(row.tolerance);
  j["verdict"] = to_string(row.verdict);
  if (!row.note.empty()) j["note"] = row.note;
  return j;
}

ordered_json check_json(const CheckResult& r) {
  ordered_json j;
  j["check_id"] = r.id;
  j["provenance"] = r.provenance;
  j["kind"] = to_string(r.kind);
  j["verdict"] = to_string(r.verdict);
  j["quantity"] = r.quantity;
  j["estimate"] = number(r.estimate);
  j["stderr"] = number(r.stderr);
  j["target"] = number(r.target);
  j["z_score"] = number(r.z);
  j["n_paths"] = r.n_paths;
  j["grid_dt"] = number(r.grid_dt);
  j["seed"] = r.seed;
  if (!r.reason.empty()) j["reason"] = r.reason;
  j["rows"] = ordered_json::array();
  for (const auto& row : r.rows) j["rows"].push_back(row_json(row));
  ordered_json metrics = ordered_json::object();
  for (const auto& [name, value] : r.metrics) metrics[name] = number(value);
  j["metrics"] = metrics;
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string report_json(const std::vector<CheckResult>& results, const SuiteConfig& cfg) {
  ordered_json header;
  header["n_paths"] = cfg.n_paths;
  header["grid_dt"] = cfg.dt;
  header["horizon"] = cfg.horizon;
  header["seed"] = cfg.seed;
  header["tilt"] = cfg.tilt.exponential ? "exp(-u)" : "custom";
  header["c_phi"] = cfg.tilt.c_phi;
  header["z_pass"] = cfg.tol.z_pass;
  header["z_warn"] = cfg.tol.z_warn;
  header["local_convergence_eps"] = cfg.tol.local_convergence_eps;
  header["algebra_tol"] = cfg.tol.algebra_tol;
  header["identity_tol"] = cfg.tol.identity_tol;
  header["quadrature_tol"] = cfg.tol.quadrature_tol;
  header["verdict_rule"] =
      "statistical rows pass when |z| <= z_pass (equality) or z <= z_pass (upper bound), warn up to "
      "z_warn, fail beyond; deterministic rows pass or fail against their tolerance";
  header["exit_rule"] = "exit 0 iff no row fails and at most one row warns";

  int warns = 0, fails = 0;
  for (const auto& r : results)
    for (const auto& row : r.rows) {
      warns += row.verdict == Verdict::warn;
      fails += row.verdict == Verdict::fail;
    }

  ordered_json j;
  j["header"] = header;
  j["summary"] = {{"checks", results.size()}, {"warn_rows", warns}, {"fail_rows", fails},
                  {"exit_code", exit_code(results)}};
  j["checks"] = ordered_json::array();
  for (const auto& r : results) j["checks"].push_back(check_json(r));
  return j.dump(2) + "\n";
}

std::string report_csv(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  out << "check_id,quantity,estimate,stderr,target,z_score,verdict,kind,n_paths,grid_dt,seed\n";
  for (const auto& r : results) {
    for (const auto& row : r.rows)
      out << r.id << ',' << csv_field(row.quantity) << ',' << format_double(row.estimate) << ','
          << format_double(row.stderr) << ',' << format_double(row.target) << ',' << format_double(row.z)
          << ',' << to_string(row.verdict) << ',' << to_string(row.kind) << ',' << r.n_paths << ','
          << format_double(r.grid_dt) << ',' << r.seed << '\n';
    if (!r.reason.empty())
      out << r.id << ',' << csv_field("aborted: " + r.reason) << ",nan,nan,nan,nan,fail,"
          << to_string(r.kind) << ',' << r.n_paths << ',' << format_double(r.grid_dt) << ',' << r.seed << '\n';
  }
  return out.str();
}

std::string table_csv(const std::vector<TableRow>& rows) {
  std::ostringstream out;
  out << "level,estimate,stderr,bias_proxy\n";
  for (const auto& r : rows)
    out << format_double(r.level) << ',' << format_double(r.estimate) << ',' << format_double(r.stderr)
        << ',' << format_double(r.bias_proxy) << '\n';
  return out.str();
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

void write_reports(const std::filesystem::path& dir, const std::vector<CheckResult>& results,
                   const SuiteConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "report.json", report_json(results, cfg));
  write_text(dir / "report.csv", report_csv(results));
}

}  // namespace penalise
