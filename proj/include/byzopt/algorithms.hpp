#pragma once

// Agent-level simulations of the six algorithms over SyncNetwork.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "byzopt/certificate.hpp"
#include "byzopt/network.hpp"
#include "byzopt/scenario.hpp"

namespace byzopt {

enum class GradientVerdict {
  Ok,
  SmallerEstimateLargerGradient,  // rule 1
  LargerEstimateSmallerGradient,  // rule 2
  ExceedsBound,                   // rule 3
};

std::string to_string(GradientVerdict v);

/// Gradients received from each peer, paired with the receiver's own
/// estimates. Any inconsistency isolates the sender and clears the record,
/// so the stored points are always monotone; one ordered index over the
/// estimates answers all three admissibility rules.
class GradientRecord {
 public:
  GradientRecord() = default;
  GradientRecord(std::vector<AgentId> peers, double lipschitz);

  double lipschitz() const noexcept { return lipschitz_; }
  int size() const noexcept { return static_cast<int>(t_.size()); }
  const std::vector<AgentId>& peers() const noexcept { return peers_; }

  /// One round: t, the estimate x[t-1], and one gradient per peer.
  void append(int t, double x, const std::map<AgentId, double>& gradients);
  void clear();

  /// (x, g) pairs of one peer sorted by x, one per distinct x.
  std::vector<std::pair<double, double>> points(AgentId peer) const;

  friend GradientVerdict check_gradient_admissible(const GradientRecord& rec, AgentId peer, int t, double x, double g);

 private:
  std::size_t slot(AgentId peer) const;

  std::vector<AgentId> peers_;
  double lipschitz_ = 0.0;
  std::vector<int> t_;
  std::vector<double> x_;
  std::vector<std::vector<double>> g_;   // per peer slot, per entry
  std::map<double, std::size_t> by_x_;  // estimate -> an entry at it
};

/// Rule 1: some earlier x' <= x had g' > g. Rule 2: some earlier x' >= x
/// had g' < g. Rule 3: |g| > L. Exact comparisons. `t` must exceed every
/// recorded round.
GradientVerdict check_gradient_admissible(const GradientRecord& rec, AgentId peer, int t, double x, double g);

/// Derivative of the piecewise-linear function through `points` (sorted by
/// x), constant beyond the ends.
double interpolate_derivative(const std::vector<std::pair<double, double>>& points, double x);

struct TracePoint {
  int run = 0;
  int round = 0;
  double estimate = 0.0;
  double aggregate = 0.0;
};

struct Detection {
  int run = 0;
  int round = 0;
  AgentId agent = 0;
  std::string reason;
};

struct MedianCounts {
  int at_most = 0;   // |{i in N : v_i <= x}|
  int at_least = 0;  // |{i in N : v_i >= x}|
  int required = 0;  // ceil(n/2) - phi
};

struct AlgorithmOutcome {
  Algorithm algorithm = Algorithm::Alg1;
  std::map<AgentId, double> outputs;  // non-faulty agents
  double output = 0.0;
  bool converged = false;
  std::string stop_reason;
  int iterations = 0;    // gradient rounds in the final run
  int total_rounds = 0;  // over all runs
  int restarts = 0;
  std::vector<Detection> detections;
  std::vector<AgentId> survivors;
  int final_n = 0;
  int final_f = 0;
  /// Aggregate the algorithm drives to zero, at the output.
  double residual = 0.0;

  std::optional<WeightCertificate> certificate;
  std::optional<VerificationReport> verification;
  std::string certificate_error;
  /// Second construction certifying beta = 1/n (Algorithms 1 to 3).
  std::optional<WeightCertificate> alt_certificate;
  std::optional<VerificationReport> alt_verification;

  std::optional<ValidFunctionSpec> membership_spec;
  bool membership_feasible = false;
  std::optional<double> distance_to_y;

  std::optional<MedianCounts> median_counts;
  std::map<AgentId, double> medians;

  /// Cov of the non-faulty argmins, and the distance of the output from it.
  std::pair<double, double> hull{0.0, 0.0};
  double hull_excess = 0.0;
  /// [a - n lambda[0] L, b + n lambda[0] L] when L is known.
  std::optional<std::pair<double, double>> estimate_bound;

  std::vector<TracePoint> trace;
  std::vector<RoundLog> rounds;

  bool certificate_passed() const;
};

AlgorithmOutcome run_alg1(const Scenario& s);
AlgorithmOutcome run_alg2(const Scenario& s);
AlgorithmOutcome run_alg3(const Scenario& s);
AlgorithmOutcome run_alg4(const Scenario& s);
AlgorithmOutcome run_alg5(const Scenario& s);
AlgorithmOutcome run_alg6(const Scenario& s);

/// Dispatch on s.algorithm. Validates first (ConfigError).
AlgorithmOutcome run_algorithm(const Scenario& s);

/// 0 when y_membership holds at x, otherwise the distance to the nearest
/// feasible point on a 2001-point grid over `hull` (infinity if none).
double distance_to_y(const std::map<AgentId, AdmissibleFunction>& non_faulty, const ValidFunctionSpec& spec, double x,
                     std::pair<double, double> hull, double zero_tol);

}  // namespace byzopt
