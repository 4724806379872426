#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "penalise/verify.hpp"

namespace penalise {

/// Shortest decimal string that reads back to the same double ("nan",
/// "inf" and "-inf" for non-finite values).
std::string format_double(double x);

/// Full report: a header describing the run and the verdict rules, then one
/// object per check with all of its rows.
std::string report_json(const std::vector<CheckResult>& results, const SuiteConfig& cfg);

/// One line per row: check_id, quantity, estimate, stderr, target, z_score,
/// verdict, kind, n_paths, grid_dt, seed.
std::string report_csv(const std::vector<CheckResult>& results);

std::string table_csv(const std::vector<TableRow>& rows);

/// Writes report.json and report.csv into dir (created if missing).
void write_reports(const std::filesystem::path& dir, const std::vector<CheckResult>& results,
                   const SuiteConfig& cfg);

/// Writes text to a file, throwing std::runtime_error on I/O failure.
void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace penalise
