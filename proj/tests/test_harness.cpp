#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "byzopt/impossibility.hpp"
#include "byzopt/report.hpp"
#include "byzopt/scenario_io.hpp"
#include "scenarios.hpp"

using namespace byzopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("byzopt_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const nlohmann::json& j) { std::ofstream(p) << j.dump(2); }

nlohmann::json e1_json() {
  return nlohmann::json::parse(slurp(fs::path(BYZOPT_SOURCE_DIR) / "examples_scenarios" / "e1_alg1.json"));
}

Scenario alg3_scenario() {
  auto s = fixture::make(Algorithm::Alg3, fixture::hubers({0, 1, 2, 5}), 1, {4},
                         fixture::adversary(AdversaryKind::MedianDrag));
  s.name = "alg3_drag";
  s.lipschitz = 2.0;
  s.max_rounds = 2000;
  s.tol = 1e-3;
  s.seed = 11;
  return s;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("E1 scenario file gives output 2.5 and a passing report") {
  auto dir = scratch("e1");
  auto r = run_scenario_json(e1_json(), {}, dir);
  REQUIRE(r.report);
  CHECK(r.exit_code == kExitPass);
  CHECK(r.report->outcome.output == 2.5);
  CHECK(fs::exists(dir / "e1_alg1.report.json"));
  CHECK(fs::exists(dir / "e1_alg1.trace.jsonl"));
  CHECK(fs::exists(dir / "e1_alg1.rounds.jsonl"));
  auto v = verify_report(r.report_path);
  CHECK(v.exit_code == kExitPass);
}

TEST_CASE("report serialization round-trips") {
  for (const Scenario& s : {scenario_from_json(e1_json()), alg3_scenario()}) {
    RunReport r = make_report(s);
    std::string text = serialize(r);
    RunReport back = report_from_json(nlohmann::json::parse(text));
    CHECK(serialize(back) == text);
    REQUIRE(back.outcome.certificate);
    CHECK(back.outcome.certificate->weights == r.outcome.certificate->weights);
  }
}

TEST_CASE("equal scenario and seed give byte-identical reports") {
  auto a = scratch("det_a"), b = scratch("det_b");
  auto j = to_json(alg3_scenario());
  auto ra = run_scenario_json(j, {}, a), rb = run_scenario_json(j, {}, b);
  REQUIRE(ra.report);
  CHECK(slurp(ra.report_path) == slurp(rb.report_path));
  CHECK(slurp(a / "alg3_drag.rounds.jsonl") == slurp(b / "alg3_drag.rounds.jsonl"));
}

TEST_CASE("overrides replace seed, rounds and tolerance") {
  RunOverrides ov;
  ov.seed = 99;
  ov.max_rounds = 5;
  ov.tol = 1e-12;
  std::vector<AdmissibleFunction> fs;
  for (auto [a, l] : {std::pair{0.0, 5.0}, {1.0, 20.0}, {3.0, 7.0}, {8.0, 30.0}})
    fs.push_back(AdmissibleFunction::huber(a, l, 10.0));
  auto s = fixture::make(Algorithm::Alg3, fs, 1);
  s.lipschitz = 30.0;
  auto r = run_scenario_json(to_json(s), ov, scratch("ov"), false);
  REQUIRE(r.report);
  CHECK(r.report->scenario.seed == 99u);
  CHECK(r.report->outcome.iterations <= 5);
  CHECK(r.report->outcome.stop_reason == "max_rounds");
}

TEST_CASE("configuration failures have distinct exit codes") {
  auto dir = scratch("codes");
  auto j = e1_json();
  j["f"] = 2;
  auto resilience = run_scenario_json(j, {}, dir);
  CHECK(resilience.exit_code == kExitInvariantViolation);
  CHECK(resilience.error_kind == "resilience");

  j = e1_json();
  j["adversary"] = "nope";
  auto unknown = run_scenario_json(j, {}, dir);
  CHECK(unknown.exit_code == kExitUnknownAdversary);

  std::ofstream(dir / "broken.json") << "{\"n\": ";
  auto parse = run_scenario(dir / "broken.json", {}, dir);
  CHECK(parse.exit_code == kExitConfigError);

  j = e1_json();
  j["unexpected"] = 1;
  CHECK(run_scenario_json(j, {}, dir).exit_code == kExitConfigError);
  CHECK(run_scenario(dir / "missing.json", {}, dir).exit_code == kExitConfigError);
}

TEST_CASE("verify rejects a tampered certificate") {
  auto dir = scratch("tamper");
  auto r = run_scenario_json(e1_json(), {}, dir);
  auto doc = nlohmann::json::parse(slurp(r.report_path));
  doc["certificates"][0]["certificate"]["weights"]["1"] = 0.5;
  write(dir / "tampered.json", doc);
  auto v = verify_report(dir / "tampered.json");
  CHECK(v.exit_code == kExitCertificateFail);
}

TEST_CASE("sweep over n and algorithm") {
  auto dir = scratch("sweep");
  fs::path ex = fs::path(BYZOPT_SOURCE_DIR) / "examples_scenarios" / "sweep";
  auto res = sweep(ex / "template.json", ex / "grid.json", dir, 2);
  REQUIRE(res.rows.size() == 9);
  for (const auto& row : res.rows) {
    CHECK(row.status == "pass");
    CHECK(row.f == (row.n - 1) / 3);
  }
  std::string csv = slurp(res.summary_path);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
  CHECK(csv.rfind("cell,n,f,phi,algorithm,output,residual,gamma_achieved,beta_achieved,status\n", 0) == 0);
}

TEST_CASE("sweep edge cases") {
  auto dir = scratch("sweep_edges");
  fs::path ex = fs::path(BYZOPT_SOURCE_DIR) / "examples_scenarios" / "sweep";
  write(dir / "empty.json", nlohmann::json::object());
  auto empty = sweep(ex / "template.json", dir / "empty.json", dir, 1);
  CHECK(empty.rows.empty());
  CHECK(slurp(empty.summary_path) == "cell,n,f,phi,algorithm,output,residual,gamma_achieved,beta_achieved,status\n");

  auto tmpl = nlohmann::json::parse(slurp(ex / "template.json"));
  tmpl["f"] = 1;
  write(dir / "tmpl.json", tmpl);
  write(dir / "grid.json", {{"n", {3, 4, 7}}});
  auto mixed = sweep(dir / "tmpl.json", dir / "grid.json", dir, 1);
  REQUIRE(mixed.rows.size() == 3);
  CHECK(mixed.rows[0].status == "failed:resilience");
  CHECK(mixed.rows[1].status == "pass");
  CHECK(mixed.rows[2].status == "pass");
}

TEST_CASE("grid expansion") {
  nlohmann::json tmpl{{"name", "t"}, {"n", 4}, {"f", "auto"}};
  auto cells = expand_grid(tmpl, {{"n", {4, 7}}, {"phi", {0, 2}}});
  REQUIRE(cells.size() == 4);
  CHECK(cells[0]["f"] == 1);
  CHECK(cells[0]["faulty"].empty());
  CHECK(cells[3]["n"] == 7);
  CHECK(cells[3]["faulty"] == nlohmann::json({6, 7}));
  CHECK(cells[3]["name"] == "t_3");
  CHECK_THROWS_AS(expand_grid(tmpl, {{"n", 4}}), ConfigError);
}

TEST_CASE("impossibility scenarios") {
  auto scenarios = impossibility_scenarios(4, 1, 1);
  REQUIRE(scenarios.size() == 4);
  std::map<std::string, double> out;
  for (const auto& s : scenarios) {
    auto r = make_report(s);
    CHECK(exit_code_for(r.outcome) == kExitPass);
    out[s.name] = r.outcome.output;
  }
  CHECK(out["hull_singleton_a"] == doctest::Approx(0.0));
  CHECK(out["hull_singleton_b"] == doctest::Approx(0.0));
  CHECK(out["weight_gap_a"] == doctest::Approx(2.0));
  CHECK(out["weight_gap_b"] == doctest::Approx(2.0));
  CHECK_THROWS_AS(impossibility_scenarios(4, 2, 1), ArgumentError);
}

}
