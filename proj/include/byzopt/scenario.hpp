#pragma once

// Scenario: everything needed to reproduce one simulated execution.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "byzopt/convex_function.hpp"
#include "byzopt/trimmed_aggregate.hpp"

namespace byzopt {


enum class Algorithm { Alg1, Alg2, Alg3, Alg4, Alg5, Alg6 };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

enum class AdversaryKind {
  Honest,
  Silent,
  InadmissibleFunction,
  ConstantGradient,
  ExtremeGradient,
  VirtualFunction,
  FlipFlop,
  MedianDrag,
  Equivocate,
  Random,
};

std::string to_string(AdversaryKind k);
/// Throws ConfigError(UnknownAdversary).
AdversaryKind adversary_kind_from_string(const std::string& s);

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::Honest;
  double gradient = 0.0;   // ConstantGradient
  int sign = 1;            // ExtremeGradient
  double magnitude = 1e9;  // ExtremeGradient, FlipFlop, Random
  int period = 1;          // FlipFlop
  double target = 0.0;     // MedianDrag
  double low = 0.0;        // Equivocate
  double high = 100.0;     // Equivocate
  std::optional<AdmissibleFunction> function;  // VirtualFunction
};

/// lambda[t] = scale / (t + 1)^power
struct StepsizeSchedule {
  double scale = 1.0;
  double power = 1.0;

  double at(int t) const;
};

/// What Algorithms 4/5 do with a sender that skips a gradient broadcast.
enum class SilentPolicy { Isolate, DefaultValue };

/// Algorithm 3 trimming: drop extremes per sign, or f largest and f
/// smallest overall.
enum class Alg3Trim { Sign, Rank };

struct Scenario {
  std::string name = "scenario";
  int n = 0;
  int f = 0;
  AgentSet faulty;
  /// True local functions; a faulty agent's entry is what it would use if
  /// it behaved honestly.
  std::vector<AdmissibleFunction> functions;
  AdversarySpec adversary;
  std::map<AgentId, AdversarySpec> adversary_overrides;
  Algorithm algorithm = Algorithm::Alg1;
  StepsizeSchedule stepsize;
  int max_rounds = 100000;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  AdmissibleFunction default_function = AdmissibleFunction::quadratic(0.0, 1.0, 0.0);
  double default_value = 0.0;
  SilentPolicy silent_policy = SilentPolicy::Isolate;
  Alg3Trim alg3_trim = Alg3Trim::Sign;
  /// Gradient bound known to all agents (Algorithm 3). Defaults to the
  /// largest bound among the non-faulty functions.
  std::optional<double> lipschitz;
  int trace_stride = 1000;
  /// Stationarity slack for certificates of the iterative algorithms.
  double certificate_tolerance = 1e-3;
  bool keep_round_log = true;

  const AdversarySpec& adversary_for(AgentId id) const;
  std::vector<AgentId> non_faulty() const;
};

/// Throws ConfigError on any violated scenario invariant.
void validate(const Scenario& s);

}  // namespace byzopt
