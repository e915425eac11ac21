#pragma once

// Run reports, single runs, verification of saved reports, and sweeps.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "byzopt/algorithms.hpp"
#include "byzopt/scenario.hpp"
#include "json.hpp"

namespace byzopt {

enum ExitCode : int {
  kExitPass = 0,
  kExitIoError = 1,
  kExitCertificateFail = 2,
  kExitConfigError = 3,
  kExitInvariantViolation = 4,
  kExitUnknownAdversary = 5,
};

struct RunReport {
  Scenario scenario;
  AlgorithmOutcome outcome;
  /// Stationarity tolerance the certificates were checked with.
  double stationarity_tolerance = 1e-8;
};

/// Deterministic summary document (no wall-clock, no traces).
nlohmann::json to_json(const RunReport& r);
std::string serialize(const RunReport& r);
/// Inverse of to_json for everything the document carries.
RunReport report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const WeightCertificate& c);
WeightCertificate certificate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const VerificationReport& v);
nlohmann::json to_json(const ValidFunctionSpec& s);

int exit_code_for(const AlgorithmOutcome& o);

/// Run a validated scenario and package the result.
RunReport make_report(const Scenario& s);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> max_rounds;
  std::optional<double> tol;
};

struct RunResult {
  int exit_code = kExitPass;
  std::optional<RunReport> report;
  std::string message;
  std::string error_kind;  // parse, resilience, unknown_adversary, config, invariant, io
  std::filesystem::path report_path;
};

/// --out, then BYZOPT_OUT_DIR, then ./byzopt-out.
std::filesystem::path default_out_dir(const std::optional<std::filesystem::path>& requested);

/// Loads, runs and writes <out>/<name>.report.json plus the trace and
/// round-log JSONL files. Never throws; errors become exit codes.
RunResult run_scenario(const std::filesystem::path& scenario_file, const RunOverrides& overrides,
                       const std::filesystem::path& out_dir, bool write_traces = true);

/// Same, for an in-memory scenario document.
RunResult run_scenario_json(const nlohmann::json& scenario, const RunOverrides& overrides,
                            const std::filesystem::path& out_dir, bool write_traces = true);

struct VerifyResult {
  int exit_code = kExitPass;
  std::vector<std::string> lines;
};

/// Re-checks every certificate in a saved report against the true
/// non-faulty functions of its scenario echo.
VerifyResult verify_report(const std::filesystem::path& report_file);

struct SweepRow {
  std::string cell;
  int n = 0;
  int f = 0;
  int phi = 0;
  std::string algorithm;
  std::optional<double> output;
  std::optional<double> residual;
  std::optional<int> gamma_achieved;
  std::optional<double> beta_achieved;
  std::string status;
  int exit_code = kExitPass;
  std::string message;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::filesystem::path summary_path;
};

/// Cartesian product of the grid's keys (sorted) applied to the template.
/// Grid values replace template keys; "phi" makes the last phi agents
/// faulty, f = "auto" means floor((n-1)/3).
std::vector<nlohmann::json> expand_grid(const nlohmann::json& scenario_template, const nlohmann::json& grid);

SweepResult sweep(const std::filesystem::path& template_file, const std::filesystem::path& grid_file,
                  const std::filesystem::path& out_dir, unsigned threads = 0);

std::string summary_csv(const std::vector<SweepRow>& rows);

}  // namespace byzopt
