#include "byzopt/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "byzopt/errors.hpp"
#include "byzopt/scenario_io.hpp"

namespace byzopt {

using nlohmann::json;

namespace {

json optional_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const RoundLog& r) {
  json j{{"run", r.run}, {"round", r.round}, {"phase", r.phase}};
  if (r.estimate) j["estimate"] = *r.estimate;
  if (!r.values.empty()) {
    json v = json::array();
    for (const auto& [id, value] : r.values) v.push_back({id, optional_value(value)});
    j["broadcasts"] = v;
  }
  if (!r.functions.empty()) {
    json v = json::array();
    for (const auto& [id, fn] : r.functions) v.push_back({id, fn ? to_json(*fn) : json(nullptr)});
    j["functions"] = v;
  }
  if (!r.deliveries.empty()) {
    json v = json::array();
    for (const auto& d : r.deliveries) v.push_back({d.sender, d.receiver, d.value, d.defaulted});
    j["deliveries"] = v;
  }
  if (!r.detections.empty()) {
    json v = json::array();
    for (const auto& d : r.detections) v.push_back({{"agent", d.agent}, {"reason", d.reason}});
    j["detections"] = v;
  }
  if (r.consensus) j["consensus"] = *r.consensus;
  if (r.restart) j["restart"] = true;
  return j;
}

void write_jsonl(std::ostream& out, const std::vector<RoundLog>& logs) {
  for (const auto& r : logs) out << to_json(r).dump() << '\n';
}

SyncNetwork::SyncNetwork(AgentSet faulty, bool keep_log) : faulty_(std::move(faulty)), keep_log_(keep_log) {}

RoundLog* SyncNetwork::current() {
  if (!keep_log_) return &scratch_;
  if (log_.empty()) log_.emplace_back();
  return &log_.back();
}

void SyncNetwork::begin_round(int run, int round, std::string phase, std::optional<double> estimate) {
  RoundLog r;
  r.run = run;
  r.round = round;
  r.phase = std::move(phase);
  r.estimate = estimate;
  if (keep_log_) log_.push_back(std::move(r));
  else scratch_ = std::move(r);
}

const std::map<AgentId, std::optional<double>>& SyncNetwork::byz_broadcast(
    std::map<AgentId, std::optional<double>> sent) {
  last_values_ = std::move(sent);
  if (keep_log_) {
    auto* r = current();
    r->values.assign(last_values_.begin(), last_values_.end());
  }
  return last_values_;
}

const std::map<AgentId, std::optional<AdmissibleFunction>>& SyncNetwork::byz_broadcast_functions(
    std::map<AgentId, std::optional<AdmissibleFunction>> sent) {
  last_functions_ = std::move(sent);
  if (keep_log_) {
    auto* r = current();
    r->functions.assign(last_functions_.begin(), last_functions_.end());
  }
  return last_functions_;
}

std::map<AgentId, double> SyncNetwork::point_to_point_send(AgentId sender, const std::vector<AgentId>& receivers,
                                                           const std::map<AgentId, std::optional<double>>& sent,
                                                           double default_value) {
  std::map<AgentId, double> delivered;
  auto* r = current();
  for (AgentId to : receivers) {
    auto it = sent.find(to);
    bool ok = it != sent.end() && it->second && std::isfinite(*it->second);
    double v = ok ? *it->second : default_value;
    delivered[to] = v;
    if (keep_log_) r->deliveries.push_back({sender, to, v, !ok});
  }
  return delivered;
}

double SyncNetwork::exact_consensus(const std::map<AgentId, double>& inputs, int f) {
  std::vector<double> all, honest;
  for (const auto& [id, v] : inputs) {
    all.push_back(v);
    if (!faulty_.count(id)) honest.push_back(v);
  }
  double out = trim::trimmed_mean(all, f);
  if (!honest.empty()) {
    auto [lo, hi] = std::minmax_element(honest.begin(), honest.end());
    if (out < *lo || out > *hi) {
      std::ostringstream os;
      os << "consensus validity violated: " << out << " outside [" << *lo << ", " << *hi << "]";
      throw InvariantViolation(os.str());
    }
  }
  if (keep_log_) current()->consensus = out;
  return out;
}

void SyncNetwork::record_detection(AgentId agent, std::string reason) {
  if (keep_log_) current()->detections.push_back({agent, std::move(reason)});
}

void SyncNetwork::record_restart() {
  if (keep_log_) current()->restart = true;
}

}  // namespace byzopt
