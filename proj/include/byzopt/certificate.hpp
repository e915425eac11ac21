#pragma once

// Weight certificates: convex-combination weights over the non-faulty
// agents showing that an output x minimises sum_i alpha_i h_i with at
// least gamma weights of size >= beta. Extraction follows the constructive
// correctness arguments for the function-exchange algorithms; verification
// and the Y-membership oracle are independent of how the weights were made.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "byzopt/convex_function.hpp"
#include "byzopt/trimmed_aggregate.hpp"

namespace byzopt {

using WeightMap = std::map<AgentId, double>;

enum class Construction { Balanced, Rescaled, Oracle, Manual };

std::string to_string(Construction c);
Construction construction_from_string(const std::string& s);

struct WeightCertificate {
  WeightMap weights;  // keyed by non-faulty agent id
  double at_x = 0.0;
  double beta = 0.0;
  int gamma = 0;
  Construction construction = Construction::Manual;
};

/// (beta, gamma) pair describing a family of valid functions.
struct ValidFunctionSpec {
  enum class Variant { Standard, Tilde, Custom };

  Variant variant = Variant::Custom;
  double beta = 0.0;
  int gamma = 0;

  /// beta = 1/(2(n-f)), gamma = n - 2f.
  static ValidFunctionSpec standard(int n, int f);
  /// beta = 1/(2(|N|-f)), gamma = |N| - f.
  static ValidFunctionSpec tilde(int non_faulty, int f);
  static ValidFunctionSpec custom(double beta, int gamma);
};

std::string to_string(ValidFunctionSpec::Variant v);

struct CertificateTolerances {
  double weight_sum = 1e-9;
  double stationarity = 1e-8;
  double threshold_slack = 1e-12;
};

/// Intermediate sets of the weight construction, kept for inspection.
struct TrimDecomposition {
  std::vector<AgentId> top;           // F-bar_1: f largest derivatives
  std::vector<AgentId> bottom;        // F-bar_2: f smallest derivatives
  std::vector<AgentId> middle;        // R* = V - F-bar_1 - F-bar_2
  std::vector<AgentId> top_honest;    // F-tilde_1 subset of F-bar_1 - F
  std::vector<AgentId> bottom_honest; // F-tilde_2 subset of F-bar_2 - F
  double zeta = 0.5;
  double zeta1 = 0.0;
};

struct ExtractionOptions {
  /// |sum over R* of h_i'(x)| allowed at the claimed root. R* sums to zero
  /// at roots of both H and rank_sum.
  double root_tolerance = 1e-8;
  /// Relative slack before an out-of-range mixing coefficient is an error.
  double clamp_tolerance = 1e-9;
};

/// Zeta-split construction: R*-F weight 1/D,
/// F-tilde_1 weight zeta/D, F-tilde_2 weight (1-zeta)/D, D = |N| - f.
/// beta = 1/(2(|N|-f)), gamma = |N| - f.
WeightCertificate extract_weights_balanced(const FunctionEnsemble& e, const AgentSet& faulty, double x,
                                        const ExtractionOptions& options = {});

/// Rescaled construction (chi normalisation); certifies beta = 1/n
/// with gamma = |N| - f.
WeightCertificate extract_weights_rescaled(const FunctionEnsemble& e, const AgentSet& faulty, double x,
                                        const ExtractionOptions& options = {});

/// Derivative-level entry point (index i -> agent i + 1), used when some
/// derivatives come from reconstructed virtual functions.
WeightCertificate extract_weights(std::span<const double> derivs, int f, const AgentSet& faulty, double x,
                                  Construction construction, const ExtractionOptions& options = {},
                                  TrimDecomposition* decomposition = nullptr);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  int count_at_beta = 0;  // weights >= beta - slack
  int strict_count = 0;   // weights > beta
  double stationarity_residual = 0.0;

  bool passed() const;
  const CheckResult* find(const std::string& name) const;
};

VerificationReport verify_certificate(const WeightCertificate& cert, const FunctionEnsemble& e, const AgentSet& faulty,
                                      const CertificateTolerances& tol = {});

/// Verification against the true functions of the non-faulty agents only.
VerificationReport verify_certificate(const WeightCertificate& cert,
                                      const std::map<AgentId, AdmissibleFunction>& non_faulty,
                                      const CertificateTolerances& tol = {});

struct MembershipResult {
  bool feasible = false;
  std::optional<WeightMap> witness;
  /// False only for the swap-chain shortcut when (gamma+1)*beta > 1.
  bool exact = true;
};

/// Enumeration is used up to this many agents; above it, the swap chain.
inline constexpr std::size_t kMembershipEnumerationLimit = 15;

/// Is there alpha >= 0, sum alpha = 1, |sum alpha d| <= zero_tol, with at
/// least gamma entries >= beta? Throws ArgumentError when gamma*beta > 1.
MembershipResult y_membership(std::span<const std::pair<AgentId, double>> derivs, const ValidFunctionSpec& spec,
                              double zero_tol = 1e-9);

/// Minimiser of sum alpha_i s_i (x - a_i)^2. Throws ArgumentError when
/// sum alpha_i s_i == 0.
double quadratic_weighted_optimum(const WeightMap& weights, const std::map<AgentId, Quadratic>& quads);

}  // namespace byzopt
