#include "byzopt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "byzopt/errors.hpp"

namespace byzopt {

namespace {

const std::pair<Algorithm, const char*> kAlgorithms[] = {
    {Algorithm::Alg1, "alg1"}, {Algorithm::Alg2, "alg2"}, {Algorithm::Alg3, "alg3"},
    {Algorithm::Alg4, "alg4"}, {Algorithm::Alg5, "alg5"}, {Algorithm::Alg6, "alg6"},
};

const std::pair<AdversaryKind, const char*> kAdversaries[] = {
    {AdversaryKind::Honest, "honest"},
    {AdversaryKind::Silent, "silent"},
    {AdversaryKind::InadmissibleFunction, "inadmissible_function"},
    {AdversaryKind::ConstantGradient, "constant_gradient"},
    {AdversaryKind::ExtremeGradient, "extreme_gradient"},
    {AdversaryKind::VirtualFunction, "virtual_function"},
    {AdversaryKind::FlipFlop, "flip_flop"},
    {AdversaryKind::MedianDrag, "median_drag"},
    {AdversaryKind::Equivocate, "equivocate"},
    {AdversaryKind::Random, "random"},
};

[[noreturn]] void fail(const std::string& what) { throw ConfigError(ConfigError::Kind::Other, what); }

}  // namespace

std::string to_string(Algorithm a) {
  for (auto [k, name] : kAlgorithms)
    if (k == a) return name;
  return "alg1";
}

Algorithm algorithm_from_string(const std::string& s) {
  for (auto [k, name] : kAlgorithms)
    if (s == name) return k;
  fail("unknown algorithm '" + s + "'");
}

std::string to_string(AdversaryKind k) {
  for (auto [kind, name] : kAdversaries)
    if (kind == k) return name;
  return "honest";
}

AdversaryKind adversary_kind_from_string(const std::string& s) {
  for (auto [kind, name] : kAdversaries)
    if (s == name) return kind;
  throw ConfigError(ConfigError::Kind::UnknownAdversary, "unknown adversary '" + s + "'");
}

double StepsizeSchedule::at(int t) const {
  double base = static_cast<double>(t) + 1.0;
  if (power == 1.0) return scale / base;
  return scale / std::pow(base, power);
}

const AdversarySpec& Scenario::adversary_for(AgentId id) const {
  auto it = adversary_overrides.find(id);
  return it == adversary_overrides.end() ? adversary : it->second;
}

std::vector<AgentId> Scenario::non_faulty() const {
  std::vector<AgentId> out;
  for (AgentId id = 1; id <= n; ++id)
    if (!faulty.count(id)) out.push_back(id);
  return out;
}

void validate(const Scenario& s) {
  if (s.f < 0) fail("f must be non-negative");
  if (s.n <= 3 * s.f) {
    std::ostringstream os;
    os << "resilience violated: n = " << s.n << " <= 3f = " << 3 * s.f;
    throw ConfigError(ConfigError::Kind::Resilience, os.str());
  }
  if (static_cast<int>(s.functions.size()) != s.n) fail("expected one function per agent");
  if (static_cast<int>(s.faulty.size()) > s.f) fail("more faulty agents than f");
  for (AgentId id : s.faulty)
    if (id < 1 || id > s.n) fail("faulty agent id out of range");
  for (const auto& entry : s.adversary_overrides)
    if (entry.first < 1 || entry.first > s.n) fail("adversary override for unknown agent");
  if (s.max_rounds < 1) fail("max_rounds must be positive");
  if (!(s.tol > 0.0) || !std::isfinite(s.tol)) fail("tol must be positive");
  if (!(s.stepsize.scale > 0.0) || !(s.stepsize.power > 0.5) || !(s.stepsize.power <= 1.0))
    fail("stepsize must satisfy sum = inf and sum of squares < inf (scale > 0, 0.5 < power <= 1)");
  if (s.trace_stride < 1) fail("trace_stride must be positive");
  if (!std::isfinite(s.default_value)) fail("default_value must be finite");
  if (!check_admissible(s.default_function).ok()) fail("default function is not admissible");
  auto check_spec = [](const AdversarySpec& a) {
    for (double v : {a.gradient, a.magnitude, a.target, a.low, a.high})
      if (!std::isfinite(v)) fail("adversary parameters must be finite");
    if (a.period < 1) fail("flip_flop period must be positive");
    if (a.sign != 1 && a.sign != -1) fail("extreme_gradient sign must be +1 or -1");
    if (a.kind == AdversaryKind::VirtualFunction && !a.function) fail("virtual_function needs a function");
  };
  check_spec(s.adversary);
  for (const auto& [id, spec] : s.adversary_overrides) check_spec(spec);
  for (AgentId id : s.non_faulty()) {
    const auto& fn = s.functions[static_cast<std::size_t>(id - 1)];
    if (!check_admissible(fn).ok()) fail("function of non-faulty agent " + std::to_string(id) + " is not admissible");
  }
  if (s.algorithm == Algorithm::Alg3) {
    double bound = 0.0;
    if (s.lipschitz) {
      bound = *s.lipschitz;
    } else {
      for (AgentId id : s.non_faulty()) {
        auto b = s.functions[static_cast<std::size_t>(id - 1)].lipschitz_bound();
        if (!b) fail("algorithm 3 needs a Lipschitz bound: set 'lipschitz' or use bounded functions");
        bound = std::max(bound, *b);
      }
    }
    if (!(bound > 0.0) || !std::isfinite(bound)) fail("Lipschitz bound must be positive");
    for (AgentId id : s.non_faulty()) {
      auto b = s.functions[static_cast<std::size_t>(id - 1)].lipschitz_bound();
      if (!b || *b > bound) fail("non-faulty function exceeds the declared Lipschitz bound");
    }
  }
}

}  // namespace byzopt
