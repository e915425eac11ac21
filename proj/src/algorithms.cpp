#include "byzopt/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "byzopt/adversary.hpp"
#include "byzopt/errors.hpp"
#include "byzopt/exact_sum.hpp"

namespace byzopt {

// ---------------------------------------------------------------- records

std::string to_string(GradientVerdict v) {
  switch (v) {
    case GradientVerdict::Ok: return "ok";
    case GradientVerdict::SmallerEstimateLargerGradient: return "rule1";
    case GradientVerdict::LargerEstimateSmallerGradient: return "rule2";
    case GradientVerdict::ExceedsBound: return "rule3";
  }
  return "ok";
}

GradientRecord::GradientRecord(std::vector<AgentId> peers, double lipschitz)
    : peers_(std::move(peers)), lipschitz_(lipschitz), g_(peers_.size()) {
  std::sort(peers_.begin(), peers_.end());
}

std::size_t GradientRecord::slot(AgentId peer) const {
  auto it = std::lower_bound(peers_.begin(), peers_.end(), peer);
  if (it == peers_.end() || *it != peer) throw ArgumentError("agent is not a peer of this record");
  return static_cast<std::size_t>(it - peers_.begin());
}

void GradientRecord::append(int t, double x, const std::map<AgentId, double>& gradients) {
  if (!t_.empty() && t <= t_.back()) throw ArgumentError("record rounds must increase");
  for (std::size_t k = 0; k < peers_.size(); ++k) {
    auto it = gradients.find(peers_[k]);
    if (it == gradients.end()) throw ArgumentError("record append is missing a peer");
    g_[k].push_back(it->second);
  }
  t_.push_back(t);
  x_.push_back(x);
  by_x_.emplace(x, x_.size() - 1);
}

void GradientRecord::clear() {
  t_.clear();
  x_.clear();
  for (auto& g : g_) g.clear();
  by_x_.clear();
}

std::vector<std::pair<double, double>> GradientRecord::points(AgentId peer) const {
  const auto& g = g_[slot(peer)];
  std::vector<std::pair<double, double>> out;
  out.reserve(by_x_.size());
  for (const auto& [x, idx] : by_x_) out.emplace_back(x, g[idx]);
  return out;
}

GradientVerdict check_gradient_admissible(const GradientRecord& rec, AgentId peer, int t, double x, double g) {
  if (!rec.t_.empty() && t <= rec.t_.back()) throw ArgumentError("check must come after every recorded round");
  const auto& hist = rec.g_[rec.slot(peer)];
  // predecessor: largest recorded x' <= x carries the largest g' among them
  auto above = rec.by_x_.upper_bound(x);
  if (above != rec.by_x_.begin() && hist[std::prev(above)->second] > g)
    return GradientVerdict::SmallerEstimateLargerGradient;
  auto at_or_above = rec.by_x_.lower_bound(x);
  if (at_or_above != rec.by_x_.end() && hist[at_or_above->second] < g)
    return GradientVerdict::LargerEstimateSmallerGradient;
  if (std::fabs(g) > rec.lipschitz_) return GradientVerdict::ExceedsBound;
  return GradientVerdict::Ok;
}

double interpolate_derivative(const std::vector<std::pair<double, double>>& points, double x) {
  if (points.empty()) throw ArgumentError("no points to interpolate");
  if (x <= points.front().first) return points.front().second;
  if (x >= points.back().first) return points.back().second;
  auto it = std::lower_bound(points.begin(), points.end(), x,
                             [](const std::pair<double, double>& p, double v) { return p.first < v; });
  if (it->first == x) return it->second;
  auto lo = std::prev(it);
  double w = (x - lo->first) / (it->first - lo->first);
  return std::clamp(lo->second + w * (it->second - lo->second), std::min(lo->second, it->second),
                    std::max(lo->second, it->second));
}

bool AlgorithmOutcome::certificate_passed() const {
  if (!verification || !verification->passed()) return false;
  if (alt_verification && !alt_verification->passed()) return false;
  if (median_counts && (median_counts->at_most < median_counts->required ||
                        median_counts->at_least < median_counts->required))
    return false;
  return true;
}

double distance_to_y(const std::map<AgentId, AdmissibleFunction>& non_faulty, const ValidFunctionSpec& spec, double x,
                     std::pair<double, double> hull, double zero_tol) {
  auto feasible_at = [&](double at) {
    std::vector<std::pair<AgentId, double>> d;
    for (const auto& [id, fn] : non_faulty) d.emplace_back(id, grad(fn, at));
    return y_membership(d, spec, zero_tol).feasible;
  };
  if (feasible_at(x)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  constexpr int kPoints = 2001;
  for (int i = 0; i < kPoints; ++i) {
    double at = hull.first + (hull.second - hull.first) * i / (kPoints - 1);
    if (std::fabs(at - x) < best && feasible_at(at)) best = std::fabs(at - x);
  }
  return best;
}

// ------------------------------------------------------------ simulation

namespace {

struct Sim {
  const Scenario& s;
  SyncNetwork net;
  std::vector<AgentId> live;  // sorted
  int f;
  std::map<AgentId, Adversary> adversaries;
  AlgorithmOutcome out;

  explicit Sim(const Scenario& scn) : s(scn), net(scn.faulty, scn.keep_round_log), f(scn.f) {
    for (AgentId id = 1; id <= s.n; ++id) live.push_back(id);
    reset_adversaries(0);
    out.algorithm = s.algorithm;
    auto [a, b] = honest_hull();
    out.hull = {a, b};
  }

  void reset_adversaries(int run) {
    adversaries.clear();
    for (AgentId id : s.faulty)
      adversaries.emplace(id, Adversary(id, s.adversary_for(id), own(id), s.seed + static_cast<std::uint64_t>(run)));
  }

  bool is_faulty(AgentId id) const { return s.faulty.count(id) != 0; }
  const AdmissibleFunction& own(AgentId id) const { return s.functions[static_cast<std::size_t>(id - 1)]; }
  Adversary& adversary(AgentId id) { return adversaries.at(id); }

  std::vector<AgentId> honest_live() const {
    std::vector<AgentId> h;
    for (AgentId id : live)
      if (!is_faulty(id)) h.push_back(id);
    return h;
  }

  std::map<AgentId, AdmissibleFunction> honest_functions() const {
    std::map<AgentId, AdmissibleFunction> m;
    for (AgentId id : live)
      if (!is_faulty(id)) m.emplace(id, own(id));
    return m;
  }

  std::pair<double, double> honest_hull() const {
    double a = std::numeric_limits<double>::infinity(), b = -a;
    for (AgentId id = 1; id <= s.n; ++id) {
      if (is_faulty(id)) continue;
      auto x = argmin_interval(own(id));
      a = std::min(a, x.lo);
      b = std::max(b, x.hi);
    }
    return {a, b};
  }

  int phi_live() const {
    int k = 0;
    for (AgentId id : live) k += is_faulty(id) ? 1 : 0;
    return k;
  }

  void finish_common(double x) {
    out.output = x;
    out.survivors = live;
    out.final_n = static_cast<int>(live.size());
    out.final_f = f;
    out.hull_excess = std::max({0.0, out.hull.first - x, x - out.hull.second});
    out.rounds = net.take_log();
  }

  void require_agreement(const std::map<AgentId, double>& values, const char* what) const {
    if (values.empty()) return;
    double first = values.begin()->second;
    for (const auto& [id, v] : values) {
      if (std::memcmp(&v, &first, sizeof(double)) != 0) {
        std::ostringstream os;
        os << "agreement violated (" << what << "): agent " << id << " holds " << v << ", expected " << first;
        throw InvariantViolation(os.str());
      }
    }
  }

  /// Exact consensus over live agents; honest agents propose `honest(id)`.
  template <class HonestValue>
  double consensus(int run, HonestValue honest) {
    net.begin_round(run, 0, "consensus");
    std::map<AgentId, double> inputs;
    for (AgentId id : live) {
      double v = is_faulty(id) ? adversary(id).consensus_input(honest(id)) : honest(id);
      inputs[id] = std::isfinite(v) ? v : s.default_value;
    }
    return net.exact_consensus(inputs, f);
  }

  void isolate(const std::vector<AgentId>& agents, int run, int round, const std::vector<std::string>& reasons) {
    for (std::size_t k = 0; k < agents.size(); ++k) {
      AgentId id = agents[k];
      if (!is_faulty(id)) throw InvariantViolation("non-faulty agent " + std::to_string(id) + " was isolated");
      if (f == 0) throw InvariantViolation("restart budget exhausted");
      net.record_detection(id, reasons[k]);
      out.detections.push_back({run, round, id, reasons[k]});
      live.erase(std::find(live.begin(), live.end(), id));
      --f;
    }
    net.record_restart();
    ++out.restarts;
  }
};

// Weights over live agents from one of the constructions, with surviving
// faulty agents represented by `derivs` entries of their choosing.
WeightCertificate certificate_over(const std::vector<AgentId>& live, const std::map<AgentId, double>& derivs,
                                   const AgentSet& faulty, int f, double x, Construction c, double root_tol) {
  std::vector<double> d;
  AgentSet faulty_pos;
  for (std::size_t p = 0; p < live.size(); ++p) {
    d.push_back(derivs.at(live[p]));
    if (faulty.count(live[p])) faulty_pos.insert(static_cast<AgentId>(p) + 1);
  }
  ExtractionOptions opt;
  opt.root_tolerance = root_tol;
  auto cert = extract_weights(d, f, faulty_pos, x, c, opt);
  WeightMap w;
  for (const auto& [pos, a] : cert.weights) w[live[static_cast<std::size_t>(pos - 1)]] = a;
  cert.weights = std::move(w);
  return cert;
}

void attach_trim_certificates(Sim& sim, const std::map<AgentId, double>& derivs, double x, double root_tol,
                              const CertificateTolerances& tol) {
  auto& out = sim.out;
  auto honest = sim.honest_functions();
  try {
    out.certificate = certificate_over(sim.live, derivs, sim.s.faulty, sim.f, x, Construction::Balanced, root_tol);
    out.verification = verify_certificate(*out.certificate, honest, tol);
    out.alt_certificate = certificate_over(sim.live, derivs, sim.s.faulty, sim.f, x, Construction::Rescaled, root_tol);
    out.alt_verification = verify_certificate(*out.alt_certificate, honest, tol);
  } catch (const ArgumentError& e) {
    out.certificate_error = e.what();
  }
  std::vector<std::pair<AgentId, double>> hd;
  for (const auto& [id, fn] : honest) hd.emplace_back(id, grad(fn, x));
  out.membership_spec = ValidFunctionSpec::tilde(static_cast<int>(honest.size()), sim.f);
  out.membership_feasible = y_membership(hd, *out.membership_spec, tol.stationarity).feasible;
}

void attach_membership_certificate(Sim& sim, const ValidFunctionSpec& spec, double x, double zero_tol) {
  auto& out = sim.out;
  auto honest = sim.honest_functions();
  std::vector<std::pair<AgentId, double>> hd;
  for (const auto& [id, fn] : honest) hd.emplace_back(id, grad(fn, x));
  out.membership_spec = spec;
  auto m = y_membership(hd, spec, zero_tol);
  out.membership_feasible = m.feasible;
  if (m.feasible) {
    out.certificate = WeightCertificate{*m.witness, x, spec.beta, spec.gamma, Construction::Oracle};
    CertificateTolerances tol;
    tol.stationarity = zero_tol;
    out.verification = verify_certificate(*out.certificate, honest, tol);
    out.distance_to_y = 0.0;
  } else {
    out.certificate_error = "no valid function has its minimum at the output";
    out.distance_to_y = distance_to_y(honest, spec, x, out.hull, zero_tol);
  }
}

// -------------------------------------------------- algorithms 1 and 2

AlgorithmOutcome run_function_exchange(const Scenario& s, RootMode mode) {
  Sim sim(s);
  sim.net.begin_round(0, 1, "functions");
  std::map<AgentId, std::optional<AdmissibleFunction>> sent;
  for (AgentId id : sim.live) sent[id] = sim.is_faulty(id) ? sim.adversary(id).function_payload() : sim.own(id);
  const auto& delivered = sim.net.byz_broadcast_functions(std::move(sent));

  std::map<AgentId, double> outputs;
  std::optional<FunctionEnsemble> ensemble;
  for (AgentId j : sim.honest_live()) {
    // agent j's view; identical across agents by construction of the broadcast
    std::vector<AdmissibleFunction> received;
    for (AgentId k : sim.live) {
      const auto& p = delivered.at(k);
      bool usable = p && check_admissible(*p).ok();
      received.push_back(usable ? *p : s.default_function);
    }
    FunctionEnsemble e(std::move(received), s.f);
    auto root = solve_root_detailed(e, mode, 1e-10);
    outputs[j] = root.x;
    sim.out.residual = root.residual;
    sim.out.iterations = root.iterations;
    if (!ensemble) ensemble.emplace(std::move(e));
  }
  sim.require_agreement(outputs, "output");
  sim.out.outputs = outputs;
  sim.out.converged = true;
  sim.out.stop_reason = "solved";
  sim.out.total_rounds = 1;
  double x = outputs.begin()->second;

  std::map<AgentId, double> derivs;
  for (AgentId id : sim.live) derivs[id] = grad(ensemble->at(id), x);
  attach_trim_certificates(sim, derivs, x, 1e-8, CertificateTolerances{});
  sim.finish_common(x);
  return std::move(sim.out);
}

// --------------------------------------------- algorithms 3, 4 and 5

enum class Aggregation { SignTrim, RankTrim, Mean, Midpoint };

double aggregate_values(Aggregation a, std::span<const double> v, int f) {
  switch (a) {
    case Aggregation::SignTrim: return trim::sign_trimmed_sum(v, f);
    case Aggregation::RankTrim: return trim::rank_window_sum(v, f);
    case Aggregation::Mean: return trim::trimmed_mean(v, f);
    case Aggregation::Midpoint: return trim::trimmed_midpoint(v, f);
  }
  return 0.0;
}

struct AgentState {
  double x = 0.0;
  GradientRecord record;
};

AlgorithmOutcome run_gradient_descent(const Scenario& s, Aggregation agg, bool check_records) {
  Sim sim(s);
  auto& out = sim.out;
  std::optional<double> lipschitz = s.lipschitz;
  if (!lipschitz) {
    double bound = 0.0;
    bool all = true;
    for (AgentId id : s.non_faulty()) {
      auto b = sim.own(id).lipschitz_bound();
      if (b) bound = std::max(bound, *b);
      else all = false;
    }
    if (all && bound > 0.0) lipschitz = bound;
  }
  if (check_records && !lipschitz) throw ConfigError(ConfigError::Kind::Other, "algorithm 3 needs a Lipschitz bound");

  const double lambda0 = s.stepsize.at(0);
  int run = 0;
  std::map<AgentId, double> last_received;
  double x_out = 0.0;

  while (true) {
    std::map<AgentId, AgentState> agents;
    double x0 = sim.consensus(run, [&](AgentId id) { return argmin_interval(sim.own(id)).lo; });
    for (AgentId j : sim.honest_live()) {
      std::vector<AgentId> peers;
      for (AgentId k : sim.live)
        if (k != j) peers.push_back(k);
      agents[j] = AgentState{x0, check_records ? GradientRecord(peers, *lipschitz) : GradientRecord()};
    }
    if (lipschitz) {
      double reach = static_cast<double>(sim.live.size()) * lambda0 * *lipschitz;
      out.estimate_bound = std::make_pair(out.hull.first - reach, out.hull.second + reach);
    }

    bool restarted = false;
    for (int t = 1; t <= s.max_rounds; ++t) {
      ++out.total_rounds;
      std::map<AgentId, double> estimates;
      for (const auto& [j, st] : agents) estimates[j] = st.x;
      sim.require_agreement(estimates, "estimate");
      double x = agents.begin()->second.x;
      sim.net.begin_round(run, t, "gradients", x);

      std::vector<double> honest_g;
      std::map<AgentId, std::optional<double>> sent;
      for (auto& [j, st] : agents) {
        double g = grad(sim.own(j), st.x);
        sent[j] = g;
        honest_g.push_back(g);
      }
      for (AgentId id : sim.live)
        if (sim.is_faulty(id)) sent[id] = sim.adversary(id).gradient({run, t, x, honest_g});
      const auto& delivered = sim.net.byz_broadcast(std::move(sent));

      // every agent screens what it received
      std::map<AgentId, std::vector<AgentId>> flagged;
      std::vector<std::string> reasons;
      std::map<AgentId, std::map<AgentId, double>> received;
      for (auto& [j, st] : agents) {
        auto& mine = flagged[j];
        for (AgentId k : sim.live) {
          const auto& v = delivered.at(k);
          std::string why;
          double g = s.default_value;
          if (!v || !std::isfinite(*v)) {
            if (check_records || s.silent_policy == SilentPolicy::Isolate) why = "silent";
          } else {
            g = *v;
            if (check_records && k != j) {
              auto verdict = check_gradient_admissible(st.record, k, t, st.x, g);
              if (verdict != GradientVerdict::Ok) why = to_string(verdict);
            }
          }
          if (!why.empty()) {
            mine.push_back(k);
            if (j == agents.begin()->first) reasons.push_back(why);
          }
          received[j][k] = g;
        }
      }
      const auto& reference = flagged.begin()->second;
      for (const auto& [j, list] : flagged)
        if (list != reference) throw InvariantViolation("agents disagree on detected senders");

      if (!reference.empty()) {
        sim.isolate(reference, run, t, reasons);
        ++run;
        sim.reset_adversaries(run);
        restarted = true;
        break;
      }

      std::map<AgentId, double> aggregates;
      for (auto& [j, st] : agents) {
        std::vector<double> vals;
        for (const auto& [k, g] : received[j]) vals.push_back(g);
        aggregates[j] = aggregate_values(agg, vals, sim.f);
        if (agg == Aggregation::Mean || agg == Aggregation::Midpoint) {
          auto [lo, hi] = std::minmax_element(honest_g.begin(), honest_g.end());
          if (aggregates[j] < *lo || aggregates[j] > *hi)
            throw InvariantViolation("trimmed aggregate left the range of non-faulty gradients");
        }
        if (check_records) {
          std::map<AgentId, double> peers_only = received[j];
          peers_only.erase(j);
          st.record.append(t, st.x, peers_only);
        }
      }
      sim.require_agreement(aggregates, "aggregate");
      double a = aggregates.begin()->second;
      out.iterations = t;

      bool stop = std::fabs(a) <= s.tol || t == s.max_rounds;
      if (t == 1 || t % s.trace_stride == 0 || stop) out.trace.push_back({run, t, x, a});
      if (stop) {
        out.converged = std::fabs(a) <= s.tol;
        out.stop_reason = out.converged ? "tolerance" : "max_rounds";
        out.residual = a;
        x_out = x;
        last_received = received.begin()->second;
        for (auto& [j, st] : agents) out.outputs[j] = st.x;
        if (check_records) {
          // surviving faulty agents act through the function their record describes
          const auto& rec = agents.begin()->second.record;
          for (AgentId k : sim.live)
            if (sim.is_faulty(k) && k != agents.begin()->first)
              last_received[k] = interpolate_derivative(rec.points(k), x);
        }
        break;
      }
      double step = s.stepsize.at(t - 1);
      for (auto& [j, st] : agents) {
        st.x = st.x - step * aggregates[j];
        if (out.estimate_bound && (st.x < out.estimate_bound->first || st.x > out.estimate_bound->second)) {
          std::ostringstream os;
          os << "estimate " << st.x << " left [" << out.estimate_bound->first << ", " << out.estimate_bound->second
             << "]";
          throw InvariantViolation(os.str());
        }
      }
    }
    if (!restarted) break;
  }

  if (check_records) {
    for (auto& [k, g] : last_received)
      if (!sim.is_faulty(k)) g = grad(sim.own(k), x_out);
    CertificateTolerances tol;
    tol.stationarity = s.certificate_tolerance;
    attach_trim_certificates(sim, last_received, x_out, s.certificate_tolerance, tol);
  } else if (agg == Aggregation::Mean) {
    attach_membership_certificate(sim, ValidFunctionSpec::standard(static_cast<int>(sim.live.size()), sim.f), x_out,
                                  s.certificate_tolerance);
  } else {
    attach_membership_certificate(sim, ValidFunctionSpec::tilde(static_cast<int>(sim.honest_live().size()), sim.f),
                                  x_out, s.certificate_tolerance);
  }
  sim.finish_common(x_out);
  return std::move(sim.out);
}

}  // namespace

AlgorithmOutcome run_alg1(const Scenario& s) { return run_function_exchange(s, RootMode::H); }
AlgorithmOutcome run_alg2(const Scenario& s) { return run_function_exchange(s, RootMode::RankSum); }

AlgorithmOutcome run_alg3(const Scenario& s) {
  return run_gradient_descent(s, s.alg3_trim == Alg3Trim::Sign ? Aggregation::SignTrim : Aggregation::RankTrim, true);
}

AlgorithmOutcome run_alg4(const Scenario& s) { return run_gradient_descent(s, Aggregation::Mean, false); }
AlgorithmOutcome run_alg5(const Scenario& s) { return run_gradient_descent(s, Aggregation::Midpoint, false); }

AlgorithmOutcome run_alg6(const Scenario& s) {
  Sim sim(s);
  auto& out = sim.out;
  const int n = s.n;
  const int rank = (n + 1) / 2;
  std::map<AgentId, double> v;
  for (AgentId id = 1; id <= n; ++id) v[id] = argmin_interval(sim.own(id)).lo;

  sim.net.begin_round(0, 1, "values");
  std::map<AgentId, std::vector<double>> inbox;
  for (AgentId from : sim.live) {
    std::map<AgentId, std::optional<double>> sent;
    if (sim.is_faulty(from)) {
      sent = sim.adversary(from).point_to_point(sim.live, v[from]);
    } else {
      for (AgentId to : sim.live) sent[to] = v[from];
    }
    for (const auto& [to, val] : sim.net.point_to_point_send(from, sim.live, sent, s.default_value))
      inbox[to].push_back(val);
  }
  for (AgentId j : sim.honest_live()) {
    auto& box = inbox[j];
    std::sort(box.begin(), box.end());
    out.medians[j] = box[static_cast<std::size_t>(rank - 1)];
  }
  double x = sim.consensus(0, [&](AgentId id) { return out.medians.count(id) ? out.medians[id] : v[id]; });
  for (AgentId j : sim.honest_live()) out.outputs[j] = x;
  out.converged = true;
  out.stop_reason = "solved";
  out.total_rounds = 2;

  MedianCounts c;
  for (AgentId j : sim.honest_live()) {
    c.at_most += v[j] <= x ? 1 : 0;
    c.at_least += v[j] >= x ? 1 : 0;
  }
  c.required = rank - static_cast<int>(s.faulty.size());
  out.median_counts = c;

  int non_faulty = static_cast<int>(sim.honest_live().size());
  attach_membership_certificate(sim, ValidFunctionSpec::custom(1.0 / (2.0 * non_faulty), c.required), x, 1e-8);
  out.residual = out.verification ? out.verification->stationarity_residual : 0.0;
  sim.finish_common(x);
  return std::move(out);
}

AlgorithmOutcome run_algorithm(const Scenario& s) {
  validate(s);
  switch (s.algorithm) {
    case Algorithm::Alg1: return run_alg1(s);
    case Algorithm::Alg2: return run_alg2(s);
    case Algorithm::Alg3: return run_alg3(s);
    case Algorithm::Alg4: return run_alg4(s);
    case Algorithm::Alg5: return run_alg5(s);
    case Algorithm::Alg6: return run_alg6(s);
  }
  throw ConfigError(ConfigError::Kind::Other, "unknown algorithm");
}

}  // namespace byzopt
