#include "byzopt/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace byzopt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t mix(std::uint64_t seed, AgentId id) {
  // splitmix64 finaliser over seed and id
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(id) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

AdmissibleFunction inadmissible_payload() { return AdmissibleFunction::piecewise({{-1.0, 1.0}, {1.0, -1.0}}); }

Adversary::Adversary(AgentId id, AdversarySpec spec, AdmissibleFunction own, std::uint64_t seed)
    : id_(id), spec_(std::move(spec)), own_(std::move(own)), rng_(mix(seed, id)) {}

double Adversary::draw(double lo, double hi) {
  double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::optional<AdmissibleFunction> Adversary::function_payload() {
  switch (spec_.kind) {
    case AdversaryKind::Honest: return own_;
    case AdversaryKind::Silent: return std::nullopt;
    case AdversaryKind::InadmissibleFunction: return inadmissible_payload();
    case AdversaryKind::ConstantGradient:
      // a constant derivative never has a compact argmin
      return AdmissibleFunction::piecewise({{0.0, spec_.gradient}});
    case AdversaryKind::ExtremeGradient:
      return AdmissibleFunction::quadratic(-spec_.sign * spec_.magnitude);
    case AdversaryKind::VirtualFunction: return *spec_.function;
    case AdversaryKind::FlipFlop: return AdmissibleFunction::quadratic(spec_.magnitude);
    case AdversaryKind::MedianDrag: return AdmissibleFunction::quadratic(spec_.target);
    case AdversaryKind::Equivocate: return AdmissibleFunction::quadratic(spec_.low);
    case AdversaryKind::Random:
      return AdmissibleFunction::quadratic(draw(-spec_.magnitude, spec_.magnitude), draw(0.1, 10.0));
  }
  return std::nullopt;
}

std::optional<double> Adversary::gradient(const GradientRoundView& v) {
  switch (spec_.kind) {
    case AdversaryKind::Honest: return grad(own_, v.estimate);
    case AdversaryKind::Silent: return std::nullopt;
    case AdversaryKind::InadmissibleFunction: return -grad(own_, v.estimate);
    case AdversaryKind::ConstantGradient: return spec_.gradient;
    case AdversaryKind::ExtremeGradient: return spec_.sign * spec_.magnitude;
    case AdversaryKind::VirtualFunction: return grad(*spec_.function, v.estimate);
    case AdversaryKind::FlipFlop: return (v.round / spec_.period) % 2 == 0 ? spec_.magnitude : -spec_.magnitude;
    case AdversaryKind::MedianDrag: {
      if (v.honest_gradients.empty()) return 0.0;
      auto [lo, hi] = std::minmax_element(v.honest_gradients.begin(), v.honest_gradients.end());
      // push the descent step toward the target while staying inside the
      // honest range
      if (v.estimate > spec_.target) return *hi;
      if (v.estimate < spec_.target) return *lo;
      return 0.0;
    }
    case AdversaryKind::Equivocate: return v.round % 2 == 0 ? spec_.low : spec_.high;
    case AdversaryKind::Random: return draw(-spec_.magnitude, spec_.magnitude);
  }
  return std::nullopt;
}

std::map<AgentId, std::optional<double>> Adversary::point_to_point(const std::vector<AgentId>& receivers,
                                                                   double honest_value) {
  std::map<AgentId, std::optional<double>> out;
  std::size_t half = (receivers.size() + 1) / 2;
  for (std::size_t i = 0; i < receivers.size(); ++i) {
    AgentId to = receivers[i];
    std::optional<double> v;
    switch (spec_.kind) {
      case AdversaryKind::Honest: v = honest_value; break;
      case AdversaryKind::Silent: break;
      case AdversaryKind::InadmissibleFunction: v = kNaN; break;
      case AdversaryKind::ConstantGradient: v = spec_.gradient; break;
      case AdversaryKind::ExtremeGradient: v = spec_.sign * spec_.magnitude; break;
      case AdversaryKind::VirtualFunction: v = argmin_interval(*spec_.function).lo; break;
      case AdversaryKind::FlipFlop: v = (to % 2 == 0) ? spec_.magnitude : -spec_.magnitude; break;
      case AdversaryKind::MedianDrag: v = spec_.target; break;
      case AdversaryKind::Equivocate: v = i < half ? spec_.low : spec_.high; break;
      case AdversaryKind::Random: v = draw(-spec_.magnitude, spec_.magnitude); break;
    }
    out[to] = v;
  }
  return out;
}

double Adversary::consensus_input(double honest_value) {
  switch (spec_.kind) {
    case AdversaryKind::Honest: return honest_value;
    case AdversaryKind::Silent: return kNaN;
    case AdversaryKind::InadmissibleFunction: return kNaN;
    case AdversaryKind::ConstantGradient: return spec_.gradient;
    case AdversaryKind::ExtremeGradient: return spec_.sign * spec_.magnitude;
    case AdversaryKind::VirtualFunction: return argmin_interval(*spec_.function).lo;
    case AdversaryKind::FlipFlop: return spec_.magnitude;
    case AdversaryKind::MedianDrag: return spec_.target;
    case AdversaryKind::Equivocate: return spec_.high;
    case AdversaryKind::Random: return draw(-spec_.magnitude, spec_.magnitude);
  }
  return kNaN;
}

}  // namespace byzopt
