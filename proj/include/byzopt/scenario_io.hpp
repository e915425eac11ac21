#pragma once

// JSON form of functions and scenarios.
//
//   {"kind":"quadratic","a":1,"s":1,"c":0}
//   {"kind":"huber","a":0,"L":2,"delta":1}
//   {"kind":"pwl","breakpoints":[[0,-1],[1,0],[2,1]]}
//
// Any function may carry "lipschitz_bound". A scenario lists "functions"
// explicitly or gives a seeded "generator" that produces them.

#include <filesystem>
#include <string>

#include "byzopt/scenario.hpp"
#include "json.hpp"

namespace byzopt {

nlohmann::json to_json(const AdmissibleFunction& f);
AdmissibleFunction function_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AdversarySpec& a);
AdversarySpec adversary_from_json(const nlohmann::json& j);

/// The echo written into reports: functions always explicit.
nlohmann::json to_json(const Scenario& s);
/// Parses and validates. Throws ConfigError.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

/// Functions produced by a "generator" block.
std::vector<AdmissibleFunction> generate_functions(const nlohmann::json& generator, int n, std::uint64_t seed);

}  // namespace byzopt
