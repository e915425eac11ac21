#pragma once

// Synchronous round-based network with idealized primitives: Byzantine
// broadcast (one payload per sender, seen identically by everyone), exact
// Byzantine consensus (trimmed average), and plain point-to-point sends on
// which faulty senders may equivocate.

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "byzopt/convex_function.hpp"
#include "byzopt/trimmed_aggregate.hpp"
#include "json.hpp"

namespace byzopt {

struct Delivery {
  AgentId sender = 0;
  AgentId receiver = 0;
  double value = 0.0;
  bool defaulted = false;
};

struct DetectionEvent {
  AgentId agent = 0;
  std::string reason;
};

struct RoundLog {
  int run = 0;    // increments on every restart
  int round = 0;  // t within the run
  std::string phase;
  std::optional<double> estimate;
  std::vector<std::pair<AgentId, std::optional<double>>> values;
  std::vector<std::pair<AgentId, std::optional<AdmissibleFunction>>> functions;
  std::vector<Delivery> deliveries;
  std::vector<DetectionEvent> detections;
  std::optional<double> consensus;
  bool restart = false;
};

nlohmann::json to_json(const RoundLog& r);
void write_jsonl(std::ostream& out, const std::vector<RoundLog>& logs);

class SyncNetwork {
 public:
  SyncNetwork(AgentSet faulty, bool keep_log);

  /// Opens a new log record; later calls annotate it.
  void begin_round(int run, int round, std::string phase, std::optional<double> estimate = std::nullopt);

  /// Every receiver gets exactly `sent`: empty optionals model a sender
  /// that did not broadcast, which everybody observes.
  const std::map<AgentId, std::optional<double>>& byz_broadcast(std::map<AgentId, std::optional<double>> sent);
  const std::map<AgentId, std::optional<AdmissibleFunction>>& byz_broadcast_functions(
      std::map<AgentId, std::optional<AdmissibleFunction>> sent);

  /// Plain send from one agent: receivers without a finite value get
  /// `default_value`.
  std::map<AgentId, double> point_to_point_send(AgentId sender, const std::vector<AgentId>& receivers,
                                                const std::map<AgentId, std::optional<double>>& sent,
                                                double default_value);

  /// Drop the f smallest and f largest inputs, average the rest. Throws
  /// InvariantViolation if the result leaves the non-faulty inputs' range.
  double exact_consensus(const std::map<AgentId, double>& inputs, int f);

  void record_detection(AgentId agent, std::string reason);
  void record_restart();

  const std::vector<RoundLog>& log() const noexcept { return log_; }
  std::vector<RoundLog> take_log() { return std::move(log_); }
  const AgentSet& faulty() const noexcept { return faulty_; }

 private:
  RoundLog* current();

  AgentSet faulty_;
  bool keep_log_;
  RoundLog scratch_;
  std::vector<RoundLog> log_;
  std::map<AgentId, std::optional<double>> last_values_;
  std::map<AgentId, std::optional<AdmissibleFunction>> last_functions_;
};

}  // namespace byzopt
