#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace byzopt {

/// s (x - a)^2 + c
struct Quadratic {
  double vertex = 0.0;
  double scale = 1.0;
  double offset = 0.0;

  friend bool operator==(const Quadratic&, const Quadratic&) = default;
};

/// Quadratic within `width` of the vertex, linear with slope +-`slope` beyond.
/// h(x) = slope/(2 width) (x-a)^2 near a, slope |x-a| - slope*width/2 outside.
struct Huber {
  double vertex = 0.0;
  double slope = 1.0;
  double width = 1.0;

  friend bool operator==(const Huber&, const Huber&) = default;
};

struct Breakpoint {
  double x = 0.0;
  double derivative = 0.0;

  friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

/// Convex primitive (zero at the first breakpoint) of the continuous
/// piecewise-linear derivative through the breakpoints, held constant
/// beyond the outermost ones.
struct PiecewiseLinearDerivative {
  std::vector<Breakpoint> breakpoints;

  friend bool operator==(const PiecewiseLinearDerivative&, const PiecewiseLinearDerivative&) = default;
};

struct ArgminInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
  friend bool operator==(const ArgminInterval&, const ArgminInterval&) = default;
};

/// A scalar cost function of one of the closed-form families. Immutable.
///
/// Construction only rejects malformed data (non-finite numbers, unordered
/// breakpoints). Whether the function is actually admissible (convex, C^1,
/// compact argmin, within its Lipschitz bound) is a separate question
/// answered by check_admissible(); faulty agents are allowed to broadcast
/// functions that fail it.
class AdmissibleFunction {
 public:
  using Shape = std::variant<Quadratic, Huber, PiecewiseLinearDerivative>;

  static AdmissibleFunction quadratic(double vertex, double scale = 1.0, double offset = 0.0);
  static AdmissibleFunction huber(double vertex, double slope, double width);
  static AdmissibleFunction piecewise(std::vector<Breakpoint> breakpoints);

  /// Same function with an explicitly declared derivative bound.
  AdmissibleFunction with_lipschitz_bound(std::optional<double> bound) const;

  const Shape& shape() const noexcept { return shape_; }
  /// Declared bound if one was set, otherwise the family's natural bound
  /// (slope for Huber, max |derivative| for piecewise). Empty for Quadratic.
  std::optional<double> lipschitz_bound() const noexcept { return lipschitz_; }
  bool lipschitz_declared() const noexcept { return declared_; }

  std::string kind_name() const;

  friend bool operator==(const AdmissibleFunction& a, const AdmissibleFunction& b);

 private:
  explicit AdmissibleFunction(Shape shape);

  Shape shape_;
  std::optional<double> lipschitz_;
  bool declared_ = false;
};

double eval(const AdmissibleFunction& f, double x);
double grad(const AdmissibleFunction& f, double x);

/// [min X, max X] for X = argmin f. Throws ArgumentError when the function
/// has no compact argmin (only possible for inadmissible input).
ArgminInterval argmin_interval(const AdmissibleFunction& f);

/// Derivative at every point of `xs`; AVX2 path for Quadratic/Huber when the
/// CPU supports it. Results are bit-identical to grad().
void grad_batch(const AdmissibleFunction& f, std::span<const double> xs, std::span<double> out);

enum class ViolationKind {
  NonFinite,
  NonMonotoneDerivative,
  Discontinuous,
  UnboundedArgmin,
  LipschitzExceeded,
};

std::string to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct AdmissibilityOptions {
  /// Sampling window; defaults to a window around the breakpoints / vertex.
  std::optional<std::pair<double, double>> window;
  std::size_t grid_points = 10000;
  double monotone_slack = 1e-12;
  double continuity_tolerance = 1e-6;
};

struct AdmissibilityReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationKind kind) const;
};

AdmissibilityReport check_admissible(const AdmissibleFunction& f, const AdmissibilityOptions& options = {});

}  // namespace byzopt
