#include "byzopt/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "byzopt/errors.hpp"
#include "byzopt/exact_sum.hpp"

namespace byzopt {

std::string to_string(Construction c) {
  switch (c) {
    case Construction::Balanced: return "balanced";
    case Construction::Rescaled: return "rescaled";
    case Construction::Oracle: return "oracle";
    case Construction::Manual: return "manual";
  }
  return "manual";
}

Construction construction_from_string(const std::string& s) {
  if (s == "balanced") return Construction::Balanced;
  if (s == "rescaled") return Construction::Rescaled;
  if (s == "oracle") return Construction::Oracle;
  if (s == "manual") return Construction::Manual;
  throw ArgumentError("unknown certificate construction '" + s + "'");
}

std::string to_string(ValidFunctionSpec::Variant v) {
  switch (v) {
    case ValidFunctionSpec::Variant::Standard: return "C";
    case ValidFunctionSpec::Variant::Tilde: return "C_tilde";
    case ValidFunctionSpec::Variant::Custom: return "custom";
  }
  return "custom";
}

ValidFunctionSpec ValidFunctionSpec::standard(int n, int f) {
  if (n - f <= 0) throw ArgumentError("C needs n > f");
  return {Variant::Standard, 1.0 / (2.0 * (n - f)), n - 2 * f};
}

ValidFunctionSpec ValidFunctionSpec::tilde(int non_faulty, int f) {
  if (non_faulty - f <= 0) throw ArgumentError("C_tilde needs |N| > f");
  return {Variant::Tilde, 1.0 / (2.0 * (non_faulty - f)), non_faulty - f};
}

ValidFunctionSpec ValidFunctionSpec::custom(double beta, int gamma) { return {Variant::Custom, beta, gamma}; }

namespace {

double sum_over(std::span<const double> derivs, const std::vector<AgentId>& ids) {
  std::vector<double> v;
  v.reserve(ids.size());
  for (AgentId id : ids) v.push_back(derivs[static_cast<std::size_t>(id - 1)]);
  return exact_sum(v);
}

double clamp_unit(double value, double tolerance, const char* what) {
  if (value < -tolerance || value > 1.0 + tolerance) {
    std::ostringstream os;
    os << "certificate construction: " << what << " = " << value << " outside [0,1]";
    throw InvariantViolation(os.str());
  }
  return std::clamp(value, 0.0, 1.0);
}

// Mixing coefficient for target = z*s1 + (1-z)*s2, with s1 >= 0 >= s2.
double solve_mix(double target, double s1, double s2, double tolerance, const char* what) {
  double span = s1 - s2;
  if (!(span > 0.0)) return 0.5;
  double z = (target - s2) / span;
  double scale = std::max({std::fabs(s1), std::fabs(s2), std::fabs(target), 1.0});
  return clamp_unit(z, tolerance * scale / span, what);
}

}  // namespace

WeightCertificate extract_weights(std::span<const double> derivs, int f, const AgentSet& faulty, double x,
                                  Construction construction, const ExtractionOptions& options,
                                  TrimDecomposition* decomposition) {
  int n = static_cast<int>(derivs.size());
  int phi = static_cast<int>(faulty.size());
  if (f < 0 || n <= 3 * f) throw ArgumentError("certificate extraction needs n > 3f");
  if (phi > f) throw ArgumentError("faulty set larger than f");
  for (AgentId id : faulty)
    if (id < 1 || id > n) throw ArgumentError("faulty id out of range");
  if (construction != Construction::Balanced && construction != Construction::Rescaled)
    throw ArgumentError("extraction supports thm4_1 and thm4_2 only");

  TrimDecomposition d;
  auto order = trim::order_non_increasing(derivs);
  for (int r = 0; r < n; ++r) {
    AgentId id = static_cast<AgentId>(order[static_cast<std::size_t>(r)]) + 1;
    if (r < f) d.top.push_back(id);
    else if (r >= n - f) d.bottom.push_back(id);
    else d.middle.push_back(id);
  }

  double middle_sum = sum_over(derivs, d.middle);
  if (!(std::fabs(middle_sum) <= options.root_tolerance)) {
    std::ostringstream os;
    os << "x = " << x << " is not a root: trimmed middle sum " << middle_sum;
    throw ArgumentError(os.str());
  }

  std::vector<AgentId> middle_faulty, middle_honest;
  for (AgentId id : d.middle) (faulty.count(id) ? middle_faulty : middle_honest).push_back(id);
  std::size_t k = static_cast<std::size_t>(f - phi) + middle_faulty.size();

  for (AgentId id : d.top)
    if (!faulty.count(id) && d.top_honest.size() < k) d.top_honest.push_back(id);
  for (auto it = d.bottom.rbegin(); it != d.bottom.rend(); ++it)
    if (!faulty.count(*it) && d.bottom_honest.size() < k) d.bottom_honest.push_back(*it);
  if (d.top_honest.size() != k || d.bottom_honest.size() != k)
    throw InvariantViolation("certificate construction: too few non-faulty agents in a trimmed group");

  double s1 = sum_over(derivs, d.top_honest);
  double s2 = sum_over(derivs, d.bottom_honest);
  double s_rf = sum_over(derivs, middle_faulty);

  WeightCertificate cert;
  cert.at_x = x;
  cert.construction = construction;
  int non_faulty = n - phi;
  cert.gamma = non_faulty - f;
  for (int id = 1; id <= n; ++id)
    if (!faulty.count(id)) cert.weights[id] = 0.0;

  if (construction == Construction::Balanced) {
    d.zeta = solve_mix(s_rf, s1, s2, options.clamp_tolerance, "zeta");
    double denom = static_cast<double>(non_faulty - f);
    for (AgentId id : middle_honest) cert.weights[id] = 1.0 / denom;
    for (AgentId id : d.top_honest) cert.weights[id] = d.zeta / denom;
    for (AgentId id : d.bottom_honest) cert.weights[id] = (1.0 - d.zeta) / denom;
    cert.beta = 1.0 / (2.0 * denom);
  } else {
    d.zeta = solve_mix(0.0, s1, s2, options.clamp_tolerance, "zeta");
    double c = std::max(d.zeta, 1.0 - d.zeta);
    int side = 0;
    if (s_rf > 0.0 && s1 > 0.0) {
      side = 1;
      d.zeta1 = clamp_unit(s_rf / s1, options.clamp_tolerance, "zeta_1");
    } else if (s_rf < 0.0 && s2 < 0.0) {
      side = 2;
      d.zeta1 = clamp_unit(s_rf / s2, options.clamp_tolerance, "zeta_1");
    } else if (s_rf != 0.0 && std::fabs(s_rf) > options.root_tolerance) {
      throw InvariantViolation("certificate construction: faulty middle sum has no matching side");
    }
    std::vector<std::pair<AgentId, double>> raw;
    for (AgentId id : middle_honest) raw.emplace_back(id, c);
    for (AgentId id : d.top_honest) raw.emplace_back(id, d.zeta + (side == 1 ? c * d.zeta1 : 0.0));
    for (AgentId id : d.bottom_honest) raw.emplace_back(id, (1.0 - d.zeta) + (side == 2 ? c * d.zeta1 : 0.0));
    std::vector<double> masses;
    for (auto& [id, w] : raw) masses.push_back(w);
    double chi = exact_sum(masses);
    if (!(chi > 0.0)) throw InvariantViolation("certificate construction: zero total weight");
    for (auto& [id, w] : raw) cert.weights[id] = w / chi;
    cert.beta = 1.0 / static_cast<double>(n);
  }

  if (decomposition) *decomposition = std::move(d);
  return cert;
}

WeightCertificate extract_weights_balanced(const FunctionEnsemble& e, const AgentSet& faulty, double x,
                                        const ExtractionOptions& options) {
  auto derivs = e.derivatives(x);
  return extract_weights(derivs, e.f(), faulty, x, Construction::Balanced, options);
}

WeightCertificate extract_weights_rescaled(const FunctionEnsemble& e, const AgentSet& faulty, double x,
                                        const ExtractionOptions& options) {
  auto derivs = e.derivatives(x);
  return extract_weights(derivs, e.f(), faulty, x, Construction::Rescaled, options);
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

VerificationReport verify_certificate(const WeightCertificate& cert,
                                      const std::map<AgentId, AdmissibleFunction>& non_faulty,
                                      const CertificateTolerances& tol) {
  VerificationReport r;

  double min_weight = 0.0;
  bool finite = true;
  int outside = 0;
  std::vector<double> weights, terms;
  for (const auto& [id, w] : cert.weights) {
    if (!std::isfinite(w)) finite = false;
    min_weight = std::min(min_weight, w);
    auto it = non_faulty.find(id);
    if (it == non_faulty.end()) {
      if (w != 0.0) ++outside;
      continue;
    }
    weights.push_back(w);
    if (w != 0.0) terms.push_back(w * grad(it->second, cert.at_x));
    if (w >= cert.beta - tol.threshold_slack) ++r.count_at_beta;
    if (w > cert.beta) ++r.strict_count;
  }
  if (!finite) {
    r.checks.push_back({"finite", false, 1.0, 0.0});
    return r;
  }

  r.checks.push_back({"non_negative", min_weight >= 0.0, min_weight, 0.0});
  r.checks.push_back({"support_non_faulty", outside == 0, static_cast<double>(outside), 0.0});
  double total = exact_sum(weights);
  r.checks.push_back({"weight_sum", std::fabs(total - 1.0) <= tol.weight_sum, std::fabs(total - 1.0), tol.weight_sum});
  r.stationarity_residual = std::fabs(exact_sum(terms));
  r.checks.push_back({"stationarity", r.stationarity_residual <= tol.stationarity, r.stationarity_residual,
                      tol.stationarity});
  r.checks.push_back({"weight_count", r.count_at_beta >= cert.gamma, static_cast<double>(r.count_at_beta),
                      static_cast<double>(cert.gamma)});
  return r;
}

VerificationReport verify_certificate(const WeightCertificate& cert, const FunctionEnsemble& e, const AgentSet& faulty,
                                      const CertificateTolerances& tol) {
  std::map<AgentId, AdmissibleFunction> non_faulty;
  for (AgentId id = 1; id <= e.n(); ++id)
    if (!faulty.count(id)) non_faulty.emplace(id, e.at(id));
  return verify_certificate(cert, non_faulty, tol);
}

MembershipResult y_membership(std::span<const std::pair<AgentId, double>> derivs, const ValidFunctionSpec& spec,
                              double zero_tol) {
  const double beta = spec.beta;
  const int gamma = spec.gamma;
  if (!(beta >= 0.0) || gamma < 0) throw ArgumentError("valid-function spec needs beta >= 0 and gamma >= 0");
  if (gamma * beta > 1.0 + 1e-15) throw ArgumentError("infeasible valid-function spec: gamma * beta > 1");

  MembershipResult out;
  const std::size_t m = derivs.size();
  if (m == 0 || static_cast<std::size_t>(gamma) > m) {
    out.feasible = false;
    return out;
  }

  std::vector<std::pair<AgentId, double>> sorted(derivs.begin(), derivs.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.second < b.second || (a.second == b.second && a.first < b.first);
  });
  const double lo_d = sorted.front().second;
  const double hi_d = sorted.back().second;
  const double rest = std::max(0.0, 1.0 - gamma * beta);

  auto subset_value = [&](const std::vector<std::size_t>& s) {
    std::vector<double> v;
    v.reserve(s.size());
    for (auto i : s) v.push_back(sorted[i].second);
    return beta * exact_sum(v);
  };
  auto hits = [&](double v) { return v + rest * lo_d <= zero_tol && v + rest * hi_d >= -zero_tol; };

  auto make_witness = [&](const std::vector<std::size_t>& s, double v) {
    WeightMap w;
    for (const auto& [id, dv] : sorted) w[id] = 0.0;
    for (auto i : s) w[sorted[i].first] += beta;
    if (rest > 0.0) {
      double high_share = 0.0;
      if (hi_d > lo_d) high_share = std::clamp((-v - rest * lo_d) / (hi_d - lo_d), 0.0, rest);
      w[sorted.front().first] += rest - high_share;
      w[sorted.back().first] += high_share;
    }
    return w;
  };

  std::vector<std::size_t> s(static_cast<std::size_t>(gamma));
  std::iota(s.begin(), s.end(), std::size_t{0});
  const std::size_t g = s.size();

  if (m <= kMembershipEnumerationLimit) {
    out.exact = true;
    while (true) {
      double v = subset_value(s);
      if (hits(v)) {
        out.feasible = true;
        out.witness = make_witness(s, v);
        return out;
      }
      // next combination in lexicographic order
      std::size_t i = g;
      while (i > 0 && s[i - 1] == m - g + (i - 1)) --i;
      if (i == 0) break;
      ++s[i - 1];
      for (std::size_t j = i; j < g; ++j) s[j] = s[j - 1] + 1;
    }
    return out;
  }

  // Swap chain from the gamma smallest to the gamma largest: move the last
  // member right one slot at a time, then the one before it, and so on.
  out.exact = (gamma + 1) * beta <= 1.0 + 1e-12;
  double v = subset_value(s);
  if (hits(v)) {
    out.feasible = true;
    out.witness = make_witness(s, v);
    return out;
  }
  for (std::size_t pos = g; pos-- > 0;) {
    std::size_t limit = m - g + pos;
    while (s[pos] < limit) {
      ++s[pos];
      v = subset_value(s);
      if (hits(v)) {
        out.feasible = true;
        out.witness = make_witness(s, v);
        return out;
      }
    }
  }
  return out;
}

double quadratic_weighted_optimum(const WeightMap& weights, const std::map<AgentId, Quadratic>& quads) {
  std::vector<double> num, den;
  for (const auto& [id, w] : weights) {
    if (w == 0.0) continue;
    auto it = quads.find(id);
    if (it == quads.end()) throw ArgumentError("weight on an agent without a quadratic");
    num.push_back(w * it->second.scale * it->second.vertex);
    den.push_back(w * it->second.scale);
  }
  double d = exact_sum(den);
  if (d == 0.0) throw ArgumentError("degenerate weights: sum of alpha_i * s_i is zero");
  return exact_sum(num) / d;
}

}  // namespace byzopt
