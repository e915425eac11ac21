#pragma once

// Ensembles on which no algorithm can do better than the guarantees
// certified elsewhere. Each construction comes as a pair of executions that
// no non-faulty agent can tell apart.

#include <vector>

#include "byzopt/scenario.hpp"

namespace byzopt {

/// Four scenarios, all running Algorithm 1 with honest-looking faulty agents:
///   hull_singleton_a/b: h_1 = (x+1)^2, h_n = (x-1)^2, h_i = x^2 + i
///     otherwise; faulty {n} in a, {1} in b. The non-faulty hulls meet only
///     at 0, where the non-faulty average is not stationary.
///   weight_gap_a/b: (x-i)^2 for i <= f and i > n-phi, (x-(f+1))^2 otherwise;
///     faulty = last phi agents in a, first f agents in b. Both force the
///     output f+1.
/// Throws ArgumentError unless n > 3f, f >= 1 and 1 <= phi <= f.
std::vector<Scenario> impossibility_scenarios(int n = 4, int f = 1, int phi = 1);

}  // namespace byzopt
