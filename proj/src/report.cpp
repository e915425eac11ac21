#include "byzopt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "byzopt/errors.hpp"
#include "byzopt/scenario_io.hpp"

namespace byzopt {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

std::string error_kind(ConfigError::Kind k) {
  switch (k) {
    case ConfigError::Kind::Parse: return "parse";
    case ConfigError::Kind::Resilience: return "resilience";
    case ConfigError::Kind::UnknownAdversary: return "unknown_adversary";
    case ConfigError::Kind::Other: return "config";
  }
  return "config";
}

// n <= 3f is reported with the invariant-violation code so the three
// configuration failures stay distinguishable by exit status.
int config_exit_code(ConfigError::Kind k) {
  switch (k) {
    case ConfigError::Kind::Resilience: return kExitInvariantViolation;
    case ConfigError::Kind::UnknownAdversary: return kExitUnknownAdversary;
    default: return kExitConfigError;
  }
}

json weights_json(const WeightMap& w) {
  json j = json::object();
  for (const auto& [id, a] : w) j[std::to_string(id)] = a;
  return j;
}

WeightMap weights_from(const json& j) {
  WeightMap w;
  for (auto it = j.begin(); it != j.end(); ++it) w[std::stoi(it.key())] = it.value().get<double>();
  return w;
}

json id_map_json(const std::map<AgentId, double>& m) { return weights_json(m); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// gamma-th largest weight: the largest beta this certificate supports.
std::optional<double> beta_achieved(const WeightCertificate& c) {
  if (c.gamma <= 0 || static_cast<std::size_t>(c.gamma) > c.weights.size()) return std::nullopt;
  std::vector<double> w;
  for (const auto& [id, a] : c.weights) w.push_back(a);
  std::sort(w.begin(), w.end(), std::greater<>());
  return w[static_cast<std::size_t>(c.gamma - 1)];
}

}  // namespace

json to_json(const WeightCertificate& c) {
  return {{"construction", to_string(c.construction)},
          {"at_x", c.at_x},
          {"beta", c.beta},
          {"gamma", c.gamma},
          {"weights", weights_json(c.weights)}};
}

WeightCertificate certificate_from_json(const json& j) {
  WeightCertificate c;
  c.construction = construction_from_string(j.at("construction").get<std::string>());
  c.at_x = j.at("at_x").get<double>();
  c.beta = j.at("beta").get<double>();
  c.gamma = j.at("gamma").get<int>();
  c.weights = weights_from(j.at("weights"));
  return c;
}

json to_json(const VerificationReport& v) {
  json checks = json::array();
  for (const auto& c : v.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"measured", c.measured}, {"threshold", c.threshold}});
  return {{"passed", v.passed()},
          {"count_at_beta", v.count_at_beta},
          {"count_strictly_above_beta", v.strict_count},
          {"stationarity_residual", v.stationarity_residual},
          {"checks", checks}};
}

namespace {

VerificationReport verification_from_json(const json& j) {
  VerificationReport v;
  v.count_at_beta = j.at("count_at_beta").get<int>();
  v.strict_count = j.at("count_strictly_above_beta").get<int>();
  v.stationarity_residual = j.at("stationarity_residual").get<double>();
  for (const auto& c : j.at("checks"))
    v.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(), c.at("measured").get<double>(),
                        c.at("threshold").get<double>()});
  return v;
}

ValidFunctionSpec spec_from_json(const json& j) {
  ValidFunctionSpec s;
  std::string v = j.at("variant").get<std::string>();
  s.variant = v == "C" ? ValidFunctionSpec::Variant::Standard
              : v == "C_tilde" ? ValidFunctionSpec::Variant::Tilde
                               : ValidFunctionSpec::Variant::Custom;
  s.beta = j.at("beta").get<double>();
  s.gamma = j.at("gamma").get<int>();
  return s;
}

}  // namespace

json to_json(const ValidFunctionSpec& s) {
  return {{"variant", to_string(s.variant)}, {"beta", s.beta}, {"gamma", s.gamma}};
}

int exit_code_for(const AlgorithmOutcome& o) { return o.certificate_passed() ? kExitPass : kExitCertificateFail; }

json to_json(const RunReport& r) {
  const auto& o = r.outcome;
  json detections = json::array();
  for (const auto& d : o.detections)
    detections.push_back({{"run", d.run}, {"round", d.round}, {"agent", d.agent}, {"reason", d.reason}});
  json outcome{
      {"algorithm", to_string(o.algorithm)},
      {"output", o.output},
      {"outputs", id_map_json(o.outputs)},
      {"converged", o.converged},
      {"stop_reason", o.stop_reason},
      {"iterations", o.iterations},
      {"total_rounds", o.total_rounds},
      {"restarts", o.restarts},
      {"detections", detections},
      {"survivors", o.survivors},
      {"final_n", o.final_n},
      {"final_f", o.final_f},
      {"residual", o.residual},
      {"hull", {o.hull.first, o.hull.second}},
      {"hull_excess", o.hull_excess},
      {"trace_points", o.trace.size()},
  };
  if (o.estimate_bound) outcome["estimate_bound"] = {o.estimate_bound->first, o.estimate_bound->second};
  if (o.median_counts)
    outcome["median_counts"] = {{"at_most", o.median_counts->at_most},
                                {"at_least", o.median_counts->at_least},
                                {"required", o.median_counts->required}};
  if (!o.medians.empty()) outcome["medians"] = id_map_json(o.medians);
  if (o.membership_spec) {
    json m{{"spec", to_json(*o.membership_spec)}, {"feasible", o.membership_feasible}};
    if (o.distance_to_y) m["distance_to_y"] = number_or_null(*o.distance_to_y);
    outcome["membership"] = m;
  }

  json certs = json::array();
  if (o.certificate) {
    json c{{"role", "primary"}, {"certificate", to_json(*o.certificate)}};
    if (o.verification) c["verification"] = to_json(*o.verification);
    certs.push_back(c);
  }
  if (o.alt_certificate) {
    json c{{"role", "beta_one_over_n"}, {"certificate", to_json(*o.alt_certificate)}};
    if (o.alt_verification) c["verification"] = to_json(*o.alt_verification);
    certs.push_back(c);
  }

  bool pass = o.certificate_passed();
  json j{
      {"format", "byzopt-run-report/1"},
      {"scenario", to_json(r.scenario)},
      {"seed", r.scenario.seed},
      {"outcome", outcome},
      {"certificates", certs},
      {"stationarity_tolerance", r.stationarity_tolerance},
      {"status", pass ? "pass" : "certificate_fail"},
      {"exit_code", exit_code_for(o)},
  };
  if (!o.certificate_error.empty()) j["certificate_error"] = o.certificate_error;
  return j;
}

std::string serialize(const RunReport& r) { return to_json(r).dump(2) + "\n"; }

RunReport report_from_json(const json& j) {
  RunReport r;
  r.scenario = scenario_from_json(j.at("scenario"));
  r.stationarity_tolerance = j.at("stationarity_tolerance").get<double>();
  const auto& o = j.at("outcome");
  auto& out = r.outcome;
  out.algorithm = algorithm_from_string(o.at("algorithm").get<std::string>());
  out.output = o.at("output").get<double>();
  out.outputs = weights_from(o.at("outputs"));
  out.converged = o.at("converged").get<bool>();
  out.stop_reason = o.at("stop_reason").get<std::string>();
  out.iterations = o.at("iterations").get<int>();
  out.total_rounds = o.at("total_rounds").get<int>();
  out.restarts = o.at("restarts").get<int>();
  for (const auto& d : o.at("detections"))
    out.detections.push_back({d.at("run").get<int>(), d.at("round").get<int>(), d.at("agent").get<int>(),
                              d.at("reason").get<std::string>()});
  out.survivors = o.at("survivors").get<std::vector<AgentId>>();
  out.final_n = o.at("final_n").get<int>();
  out.final_f = o.at("final_f").get<int>();
  out.residual = o.at("residual").get<double>();
  out.hull = {o.at("hull")[0].get<double>(), o.at("hull")[1].get<double>()};
  out.hull_excess = o.at("hull_excess").get<double>();
  out.trace.resize(o.at("trace_points").get<std::size_t>());
  if (o.contains("estimate_bound"))
    out.estimate_bound = std::make_pair(o["estimate_bound"][0].get<double>(), o["estimate_bound"][1].get<double>());
  if (o.contains("median_counts")) {
    const auto& m = o.at("median_counts");
    out.median_counts = MedianCounts{m.at("at_most").get<int>(), m.at("at_least").get<int>(),
                                     m.at("required").get<int>()};
  }
  if (o.contains("medians")) out.medians = weights_from(o.at("medians"));
  if (o.contains("membership")) {
    const auto& m = o.at("membership");
    out.membership_spec = spec_from_json(m.at("spec"));
    out.membership_feasible = m.at("feasible").get<bool>();
    if (m.contains("distance_to_y")) out.distance_to_y = number_or_inf(m.at("distance_to_y"));
  }
  for (const auto& c : j.at("certificates")) {
    std::string role = c.at("role").get<std::string>();
    auto cert = certificate_from_json(c.at("certificate"));
    std::optional<VerificationReport> v;
    if (c.contains("verification")) v = verification_from_json(c.at("verification"));
    if (role == "primary") {
      out.certificate = cert;
      out.verification = v;
    } else {
      out.alt_certificate = cert;
      out.alt_verification = v;
    }
  }
  if (j.contains("certificate_error")) out.certificate_error = j.at("certificate_error").get<std::string>();
  return r;
}

RunReport make_report(const Scenario& s) {
  RunReport r;
  r.scenario = s;
  r.outcome = run_algorithm(s);
  bool iterative = s.algorithm == Algorithm::Alg3 || s.algorithm == Algorithm::Alg4 || s.algorithm == Algorithm::Alg5;
  r.stationarity_tolerance = iterative ? s.certificate_tolerance : CertificateTolerances{}.stationarity;
  return r;
}

std::filesystem::path default_out_dir(const std::optional<std::filesystem::path>& requested) {
  if (requested) return *requested;
  if (const char* env = std::getenv("BYZOPT_OUT_DIR"); env && *env) return env;
  return "byzopt-out";
}

RunResult run_scenario_json(const json& scenario, const RunOverrides& overrides, const std::filesystem::path& out_dir,
                            bool write_traces) {
  RunResult res;
  try {
    json doc = scenario;
    if (overrides.seed) doc["seed"] = *overrides.seed;
    if (overrides.max_rounds) doc["max_rounds"] = *overrides.max_rounds;
    if (overrides.tol) doc["tol"] = *overrides.tol;
    Scenario s = scenario_from_json(doc);
    res.report = make_report(s);
    res.exit_code = exit_code_for(res.report->outcome);
    res.message = res.exit_code == kExitPass ? "pass" : "certificate check failed";

    std::filesystem::create_directories(out_dir);
    res.report_path = out_dir / (s.name + ".report.json");
    write_file(res.report_path, serialize(*res.report));
    if (write_traces) {
      std::ostringstream trace;
      for (const auto& p : res.report->outcome.trace)
        trace << json{{"run", p.run}, {"round", p.round}, {"estimate", p.estimate}, {"aggregate", p.aggregate}}.dump()
              << '\n';
      write_file(out_dir / (s.name + ".trace.jsonl"), trace.str());
      if (s.keep_round_log) {
        std::ostringstream rounds;
        write_jsonl(rounds, res.report->outcome.rounds);
        write_file(out_dir / (s.name + ".rounds.jsonl"), rounds.str());
      }
    }
  } catch (const ConfigError& e) {
    res.exit_code = config_exit_code(e.kind());
    res.error_kind = error_kind(e.kind());
    res.message = e.what();
  } catch (const InvariantViolation& e) {
    res.exit_code = kExitInvariantViolation;
    res.error_kind = "invariant";
    res.message = e.what();
  } catch (const std::exception& e) {
    res.exit_code = kExitIoError;
    res.error_kind = "io";
    res.message = e.what();
  }
  return res;
}

RunResult run_scenario(const std::filesystem::path& scenario_file, const RunOverrides& overrides,
                       const std::filesystem::path& out_dir, bool write_traces) {
  std::ifstream in(scenario_file);
  if (!in) {
    RunResult r;
    r.exit_code = kExitConfigError;
    r.error_kind = "parse";
    r.message = "cannot open scenario file " + scenario_file.string();
    return r;
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    RunResult r;
    r.exit_code = kExitConfigError;
    r.error_kind = "parse";
    r.message = scenario_file.string() + ": " + e.what();
    return r;
  }
  return run_scenario_json(doc, overrides, out_dir, write_traces);
}

VerifyResult verify_report(const std::filesystem::path& report_file) {
  VerifyResult res;
  RunReport r;
  try {
    std::ifstream in(report_file);
    if (!in) throw ConfigError(ConfigError::Kind::Parse, "cannot open report " + report_file.string());
    r = report_from_json(json::parse(in));
  } catch (const ConfigError& e) {
    res.exit_code = kExitConfigError;
    res.lines.push_back(e.what());
    return res;
  } catch (const std::exception& e) {
    res.exit_code = kExitConfigError;
    res.lines.push_back(std::string("malformed report: ") + e.what());
    return res;
  }

  std::map<AgentId, AdmissibleFunction> honest;
  for (AgentId id : r.scenario.non_faulty()) honest.emplace(id, r.scenario.functions[static_cast<std::size_t>(id - 1)]);
  CertificateTolerances tol;
  tol.stationarity = r.stationarity_tolerance;

  bool ok = true;
  auto check = [&](const char* role, const std::optional<WeightCertificate>& c) {
    if (!c) return;
    auto v = verify_certificate(*c, honest, tol);
    std::ostringstream os;
    os << role << " (" << to_string(c->construction) << ", beta=" << c->beta << ", gamma=" << c->gamma
       << "): " << (v.passed() ? "pass" : "FAIL");
    for (const auto& chk : v.checks)
      if (!chk.passed) os << " [" << chk.name << " measured " << chk.measured << " vs " << chk.threshold << "]";
    res.lines.push_back(os.str());
    ok = ok && v.passed();
  };
  const auto& o = r.outcome;
  if (!o.certificate) {
    res.lines.push_back("no certificate in report" +
                        (o.certificate_error.empty() ? std::string() : ": " + o.certificate_error));
    ok = false;
  }
  check("primary", o.certificate);
  check("beta_one_over_n", o.alt_certificate);
  if (o.median_counts) {
    const auto& m = *o.median_counts;
    bool counts = m.at_most >= m.required && m.at_least >= m.required;
    res.lines.push_back("median counts " + std::to_string(m.at_most) + "/" + std::to_string(m.at_least) +
                        " required " + std::to_string(m.required) + ": " + (counts ? "pass" : "FAIL"));
    ok = ok && counts;
  }
  res.exit_code = ok ? kExitPass : kExitCertificateFail;
  return res;
}

std::vector<json> expand_grid(const json& scenario_template, const json& grid) {
  if (!grid.is_object()) throw ConfigError(ConfigError::Kind::Parse, "grid must be an object of value lists");
  std::vector<std::pair<std::string, std::vector<json>>> axes;
  for (auto it = grid.begin(); it != grid.end(); ++it) {
    if (!it.value().is_array()) throw ConfigError(ConfigError::Kind::Parse, "grid entry '" + it.key() + "' is not a list");
    axes.emplace_back(it.key(), std::vector<json>(it.value().begin(), it.value().end()));
  }
  std::vector<json> cells;
  if (axes.empty()) return cells;
  for (const auto& [key, values] : axes)
    if (values.empty()) return cells;

  std::vector<std::size_t> idx(axes.size(), 0);
  std::string base = scenario_template.value("name", std::string("cell"));
  for (std::size_t count = 0;; ++count) {
    json cell = scenario_template;
    std::optional<int> phi;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& [key, values] = axes[a];
      if (key == "phi") phi = values[idx[a]].get<int>();
      else cell[key] = values[idx[a]];
    }
    if (phi) {
      int n = cell.at("n").get<int>();
      json faulty = json::array();
      for (int i = n - *phi + 1; i <= n; ++i) faulty.push_back(i);
      cell["faulty"] = faulty;
    }
    if (cell.contains("f") && cell["f"].is_string() && cell["f"] == "auto") cell["f"] = (cell.at("n").get<int>() - 1) / 3;
    std::ostringstream name;
    name << base << "_" << count;
    cell["name"] = name.str();
    cells.push_back(cell);

    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return cells;
    }
  }
}

std::string summary_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "cell,n,f,phi,algorithm,output,residual,gamma_achieved,beta_achieved,status\n";
  for (const auto& r : rows) {
    os << r.cell << ',' << r.n << ',' << r.f << ',' << r.phi << ',' << r.algorithm << ',';
    if (r.output) os << *r.output;
    os << ',';
    if (r.residual) os << *r.residual;
    os << ',';
    if (r.gamma_achieved) os << *r.gamma_achieved;
    os << ',';
    if (r.beta_achieved) os << *r.beta_achieved;
    os << ',' << r.status << '\n';
  }
  return os.str();
}

SweepResult sweep(const std::filesystem::path& template_file, const std::filesystem::path& grid_file,
                  const std::filesystem::path& out_dir, unsigned threads) {
  auto load = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError(ConfigError::Kind::Parse, "cannot open " + p.string());
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(ConfigError::Kind::Parse, p.string() + ": " + e.what());
    }
  };
  json tmpl = load(template_file);
  auto cells = expand_grid(tmpl, load(grid_file));

  SweepResult result;
  result.rows.resize(cells.size());
  std::filesystem::create_directories(out_dir);
  std::mutex io;
  std::size_t next = 0;

  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(io);
        if (next >= cells.size()) return;
        i = next++;
      }
      const json& cell = cells[i];
      SweepRow row;
      row.cell = cell.value("name", std::string());
      row.n = cell.value("n", 0);
      row.f = cell.contains("f") && cell["f"].is_number_integer() ? cell["f"].get<int>() : 0;
      row.phi = cell.contains("faulty") ? static_cast<int>(cell["faulty"].size()) : 0;
      row.algorithm = cell.value("algorithm", std::string());
      RunResult r = run_scenario_json(cell, {}, out_dir, false);
      row.exit_code = r.exit_code;
      row.message = r.message;
      if (r.report) {
        const auto& o = r.report->outcome;
        row.output = o.output;
        row.residual = o.residual;
        if (o.verification) row.gamma_achieved = o.verification->count_at_beta;
        if (o.certificate) row.beta_achieved = beta_achieved(*o.certificate);
        row.status = r.exit_code == kExitPass ? "pass" : "certificate_fail";
      } else {
        row.status = "failed:" + r.error_kind;
      }
      result.rows[i] = std::move(row);
    }
  };

  unsigned count = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  count = std::min<unsigned>(count, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  result.summary_path = out_dir / "summary.csv";
  write_file(result.summary_path, summary_csv(result.rows));
  return result;
}

}  // namespace byzopt
