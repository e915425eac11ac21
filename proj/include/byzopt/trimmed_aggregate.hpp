#pragma once

// Trimmed aggregates of derivative multisets: the functions F, G, H, the
// rank functions g_K, the root bracket and the deterministic root solver.
//
// Agent ids are 1-based throughout the public API; index i of any
// derivative vector belongs to agent i + 1.

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "byzopt/convex_function.hpp"
#include "byzopt/errors.hpp"

namespace byzopt {

using AgentId = int;
using AgentSet = std::set<AgentId>;

/// |h'(x)| <= this counts as an exact zero when classifying signs.
inline constexpr double kZeroTolerance = 1e-12;

class FunctionEnsemble {
 public:
  /// Throws ArgumentError unless n > 3f and every member is admissible.
  FunctionEnsemble(std::vector<AdmissibleFunction> functions, int f);

  int n() const noexcept { return static_cast<int>(functions_.size()); }
  int f() const noexcept { return f_; }
  const AdmissibleFunction& at(AgentId id) const;
  std::span<const AdmissibleFunction> functions() const noexcept { return functions_; }
  const std::vector<ArgminInterval>& argmins() const noexcept { return argmins_; }

  /// h_i'(x) for every agent, index i -> agent i + 1.
  std::vector<double> derivatives(double x) const;

 private:
  std::vector<AdmissibleFunction> functions_;
  std::vector<ArgminInterval> argmins_;
  int f_;
};

struct SignPartition {
  std::vector<AgentId> positive;  // A(x)
  std::vector<AgentId> negative;  // B(x)
  std::vector<AgentId> zero;      // C(x)
  double at_x = 0.0;
};

/// Aggregates over a raw derivative multiset. These are what the iterative
/// algorithms apply to received gradients, and what the ensemble-level
/// functions below apply to h_i'(x).
namespace trim {

SignPartition partition(std::span<const double> derivs, double at_x = 0.0);

/// Indices sorted by non-increasing value, ties by lower index first.
std::vector<std::size_t> order_non_increasing(std::span<const double> derivs);

/// Sum of the positive values after dropping the min(f, |A|) largest.
double positive_trimmed_sum(std::span<const double> derivs, int f);
/// Sum of the negative values after dropping the min(f, |B|) smallest.
double negative_trimmed_sum(std::span<const double> derivs, int f);
/// positive_trimmed_sum + negative_trimmed_sum.
double sign_trimmed_sum(std::span<const double> derivs, int f);

/// K-th largest value, K in 1..n.
double kth_largest(std::span<const double> derivs, int k);
/// Sum of the K-th largest values for K = f+1 .. n-f.
double rank_window_sum(std::span<const double> derivs, int f);

/// Mean of the values left after dropping the f smallest and f largest.
double trimmed_mean(std::span<const double> values, int f);
/// Midpoint of the extremes left after dropping the f smallest and f largest.
double trimmed_midpoint(std::span<const double> values, int f);

}  // namespace trim

SignPartition sign_partition(const FunctionEnsemble& e, double x);
double trimmed_F(const FunctionEnsemble& e, double x);
double trimmed_G(const FunctionEnsemble& e, double x);
double H(const FunctionEnsemble& e, double x);
double rank_gradient(const FunctionEnsemble& e, double x, int k);
double rank_sum(const FunctionEnsemble& e, double x);

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

/// lo = max X of the agent with the (f+1)-th smallest max X, hi = min X of
/// the agent with the (f+1)-th largest min X (ties by agent id). H and
/// rank_sum are <= 0 at lo and >= 0 at hi.
Bracket bracket(const FunctionEnsemble& e);

enum class RootMode { H, RankSum };

/// Raised when the bracket does not straddle zero. Unreachable for valid
/// ensembles.
class BracketFailure : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

struct RootResult {
  double x = 0.0;
  double residual = 0.0;  // aggregate at x
  int iterations = 0;
};

double aggregate(const FunctionEnsemble& e, RootMode mode, double x);

/// Bisection on the bracket. Stops when |aggregate| <= tol or the interval
/// is no wider than tol; the result is a pure function of the ensemble.
RootResult solve_root_detailed(const FunctionEnsemble& e, RootMode mode, double tol = 1e-10);
double solve_root(const FunctionEnsemble& e, RootMode mode, double tol = 1e-10);

/// Integral of H from c to x by adaptive Simpson. Convex in x.
double big_H(const FunctionEnsemble& e, double c, double x, double tol = 1e-10);

}  // namespace byzopt
