#pragma once

// Behaviour of one faulty agent. A fresh Adversary is created per run of a
// scenario; its random stream depends only on the scenario seed and agent id.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "byzopt/scenario.hpp"

namespace byzopt {

/// Everything a (rushing) adversary may look at in a gradient round.
struct GradientRoundView {
  int run = 0;
  int round = 0;
  double estimate = 0.0;
  std::span<const double> honest_gradients;
};

class Adversary {
 public:
  Adversary(AgentId id, AdversarySpec spec, AdmissibleFunction own, std::uint64_t seed);

  AgentId id() const noexcept { return id_; }
  const AdversarySpec& spec() const noexcept { return spec_; }

  /// Function broadcast (Algorithms 1 and 2); empty means silence.
  std::optional<AdmissibleFunction> function_payload();

  /// Gradient broadcast (Algorithms 3 to 5); empty means silence.
  std::optional<double> gradient(const GradientRoundView& view);

  /// Per-receiver values of a plain send (Algorithm 6).
  std::map<AgentId, std::optional<double>> point_to_point(const std::vector<AgentId>& receivers, double honest_value);

  /// Input to an exact consensus instance. Non-finite means "no input".
  double consensus_input(double honest_value);

 private:
  double draw(double lo, double hi);

  AgentId id_;
  AdversarySpec spec_;
  AdmissibleFunction own_;
  std::mt19937_64 rng_;
};

/// Concave function broadcast by the InadmissibleFunction adversary.
AdmissibleFunction inadmissible_payload();

}  // namespace byzopt
