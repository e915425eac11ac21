#pragma once

#include <span>

namespace byzopt {

/// Correctly rounded sum of finite doubles (Shewchuk partials, as in
/// Python's math.fsum). The result does not depend on the input order.
double exact_sum(std::span<const double> values);

}  // namespace byzopt
