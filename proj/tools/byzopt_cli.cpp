#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "byzopt/errors.hpp"
#include "byzopt/impossibility.hpp"
#include "byzopt/report.hpp"
#include "byzopt/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace byzopt;

namespace {

std::vector<fs::path> scenario_files(const fs::path& p) {
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_run(const fs::path& input, const RunOverrides& ov, const std::optional<fs::path>& out) {
  fs::path dir = default_out_dir(out);
  int worst = kExitPass;
  auto files = scenario_files(input);
  if (files.empty()) {
    std::cerr << "no scenario files in " << input << "\n";
    return kExitConfigError;
  }
  for (const auto& file : files) {
    auto start = std::chrono::steady_clock::now();
    RunResult r = run_scenario(file, ov, dir);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.report) {
      const auto& o = r.report->outcome;
      std::cout << r.report->scenario.name << ": output " << o.output << " residual " << o.residual << " rounds "
                << o.total_rounds << " -> " << r.message << " (" << r.report_path.string() << ")\n";
    } else {
      std::cout << file.string() << ": " << r.error_kind << " error: " << r.message << "\n";
    }
    std::cerr << file.filename().string() << " wall-clock " << secs << " s\n";
    worst = std::max(worst, r.exit_code);
  }
  return worst;
}

int cmd_sweep(const fs::path& tmpl, const fs::path& grid, const std::optional<fs::path>& out, unsigned threads) {
  auto start = std::chrono::steady_clock::now();
  SweepResult res;
  try {
    res = sweep(tmpl, grid, default_out_dir(out), threads);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitIoError;
  }
  std::cout << summary_csv(res.rows);
  std::cerr << res.rows.size() << " cells, summary " << res.summary_path.string() << ", wall-clock "
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";
  bool all = std::all_of(res.rows.begin(), res.rows.end(), [](const SweepRow& r) { return r.exit_code == 0; });
  return all ? kExitPass : kExitCertificateFail;
}

int cmd_verify(const fs::path& report) {
  VerifyResult v = verify_report(report);
  for (const auto& line : v.lines) std::cout << line << "\n";
  return v.exit_code;
}

int cmd_impossibility(int n, int f, int phi, const fs::path& out) {
  std::vector<Scenario> scenarios;
  try {
    scenarios = impossibility_scenarios(n, f, phi);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  for (const auto& s : scenarios) {
    fs::path p = out / (s.name + ".json");
    std::ofstream os(p);
    os << to_json(s).dump(2) << "\n";
    if (!os) {
      std::cerr << "cannot write " << p << "\n";
      return kExitIoError;
    }
    std::cout << p.string() << "\n";
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-resilient distributed optimization experiments"};
  app.require_subcommand(1);

  std::optional<fs::path> out;
  fs::path input, grid, report;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_rounds;
  std::optional<double> tol;
  unsigned threads = 0;
  int n = 4, f = 1, phi = 1;
  fs::path imp_out = "impossibility";

  auto* run = app.add_subcommand("run", "run a scenario file, or every .json file in a directory");
  run->add_option("scenario", input, "scenario file or directory")->required();
  run->add_option("--out", out, "output directory (default $BYZOPT_OUT_DIR or ./byzopt-out)");
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--max-rounds", max_rounds, "override the round budget");
  run->add_option("--tol", tol, "override the stopping tolerance");

  auto* sw = app.add_subcommand("sweep", "run the cartesian product of a parameter grid");
  sw->add_option("template", input, "scenario template")->required();
  sw->add_option("grid", grid, "grid file: object of value lists")->required();
  sw->add_option("--out", out, "output directory");
  sw->add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* ver = app.add_subcommand("verify", "re-verify the certificates in a report");
  ver->add_option("report", report, "report file")->required();

  auto* imp = app.add_subcommand("impossibility", "write the lower-bound scenario files");
  imp->add_option("--n", n);
  imp->add_option("--f", f);
  imp->add_option("--phi", phi);
  imp->add_option("--out", imp_out, "directory for the scenario files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfigError;
  }

  if (*run) {
    RunOverrides ov;
    ov.seed = seed;
    ov.max_rounds = max_rounds;
    ov.tol = tol;
    return cmd_run(input, ov, out);
  }
  if (*sw) return cmd_sweep(input, grid, out, threads);
  if (*ver) return cmd_verify(report);
  return cmd_impossibility(n, f, phi, imp_out);
}
