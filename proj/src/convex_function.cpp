#include "byzopt/convex_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "byzopt/errors.hpp"
#include "byzopt/kernels.hpp"

namespace byzopt {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ArgumentError(std::string(what) + " must be finite");
}

void require_finite_x(double x) {
  if (!std::isfinite(x)) throw DomainError("evaluation point must be finite");
}

double quadratic_grad(const Quadratic& q, double x) { return (x - q.vertex) * (2.0 * q.scale); }

double huber_grad(const Huber& h, double x) {
  const double v = (x - h.vertex) * (h.slope / h.width);
  return std::min(std::max(v, -h.slope), h.slope);
}

// Index k of the segment [x_k, x_{k+1}] containing x; assumes x0 < x < xn.
std::size_t segment_of(const std::vector<Breakpoint>& bp, double x) {
  auto it = std::upper_bound(bp.begin(), bp.end(), x, [](double v, const Breakpoint& b) { return v < b.x; });
  return static_cast<std::size_t>(it - bp.begin()) - 1;
}

double piecewise_grad(const PiecewiseLinearDerivative& p, double x) {
  const auto& bp = p.breakpoints;
  if (x <= bp.front().x) return bp.front().derivative;
  if (x >= bp.back().x) return bp.back().derivative;
  const std::size_t k = segment_of(bp, x);
  const Breakpoint& l = bp[k];
  const Breakpoint& r = bp[k + 1];
  const double v = l.derivative + (x - l.x) * ((r.derivative - l.derivative) / (r.x - l.x));
  // Clamping to the segment's endpoint values keeps the result monotone
  // across breakpoints despite rounding in the interpolation.
  return std::clamp(v, std::min(l.derivative, r.derivative), std::max(l.derivative, r.derivative));
}

}  // namespace

AdmissibleFunction::AdmissibleFunction(Shape shape) : shape_(std::move(shape)) {
  std::visit(Overloaded{
                 [](const Quadratic&) {},
                 [this](const Huber& h) { lipschitz_ = h.slope; },
                 [this](const PiecewiseLinearDerivative& p) {
                   double m = 0.0;
                   for (const auto& b : p.breakpoints) m = std::max(m, std::fabs(b.derivative));
                   lipschitz_ = m;
                 },
             },
             shape_);
}

AdmissibleFunction AdmissibleFunction::quadratic(double vertex, double scale, double offset) {
  require_finite(vertex, "quadratic vertex");
  require_finite(scale, "quadratic scale");
  require_finite(offset, "quadratic offset");
  return AdmissibleFunction(Quadratic{vertex, scale, offset});
}

AdmissibleFunction AdmissibleFunction::huber(double vertex, double slope, double width) {
  require_finite(vertex, "huber vertex");
  require_finite(slope, "huber slope");
  require_finite(width, "huber width");
  if (!(width > 0.0)) throw ArgumentError("huber width must be positive");
  return AdmissibleFunction(Huber{vertex, slope, width});
}

AdmissibleFunction AdmissibleFunction::piecewise(std::vector<Breakpoint> breakpoints) {
  if (breakpoints.empty()) throw ArgumentError("piecewise derivative needs at least one breakpoint");
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    require_finite(breakpoints[k].x, "breakpoint x");
    require_finite(breakpoints[k].derivative, "breakpoint derivative");
    if (k > 0 && !(breakpoints[k - 1].x < breakpoints[k].x)) {
      throw ArgumentError("breakpoints must be strictly increasing in x");
    }
  }
  return AdmissibleFunction(PiecewiseLinearDerivative{std::move(breakpoints)});
}

AdmissibleFunction AdmissibleFunction::with_lipschitz_bound(std::optional<double> bound) const {
  if (bound) {
    require_finite(*bound, "lipschitz bound");
    if (!(*bound > 0.0)) throw ArgumentError("lipschitz bound must be positive");
  }
  AdmissibleFunction copy(shape_);
  if (bound) {
    copy.lipschitz_ = bound;
    copy.declared_ = true;
  }
  return copy;
}

std::string AdmissibleFunction::kind_name() const {
  return std::visit(Overloaded{
                        [](const Quadratic&) { return std::string("quadratic"); },
                        [](const Huber&) { return std::string("huber"); },
                        [](const PiecewiseLinearDerivative&) { return std::string("pwl"); },
                    },
                    shape_);
}

bool operator==(const AdmissibleFunction& a, const AdmissibleFunction& b) {
  return a.shape_ == b.shape_ && a.lipschitz_ == b.lipschitz_ && a.declared_ == b.declared_;
}

double eval(const AdmissibleFunction& f, double x) {
  require_finite_x(x);
  return std::visit(Overloaded{
                        [x](const Quadratic& q) {
                          const double d = x - q.vertex;
                          return q.scale * d * d + q.offset;
                        },
                        [x](const Huber& h) {
                          const double d = std::fabs(x - h.vertex);
                          if (d <= h.width) return h.slope / (2.0 * h.width) * d * d;
                          return h.slope * d - 0.5 * h.slope * h.width;
                        },
                        [x](const PiecewiseLinearDerivative& p) {
                          const auto& bp = p.breakpoints;
                          if (x <= bp.front().x) return bp.front().derivative * (x - bp.front().x);
                          double acc = 0.0;
                          for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
                            if (x <= bp[k + 1].x) {
                              return acc + 0.5 * (x - bp[k].x) * (bp[k].derivative + piecewise_grad(p, x));
                            }
                            acc += 0.5 * (bp[k + 1].x - bp[k].x) * (bp[k].derivative + bp[k + 1].derivative);
                          }
                          return acc + bp.back().derivative * (x - bp.back().x);
                        },
                    },
                    f.shape());
}

double grad(const AdmissibleFunction& f, double x) {
  require_finite_x(x);
  return std::visit(Overloaded{
                        [x](const Quadratic& q) { return quadratic_grad(q, x); },
                        [x](const Huber& h) { return huber_grad(h, x); },
                        [x](const PiecewiseLinearDerivative& p) { return piecewise_grad(p, x); },
                    },
                    f.shape());
}

void grad_batch(const AdmissibleFunction& f, std::span<const double> xs, std::span<double> out) {
  if (out.size() < xs.size()) throw ArgumentError("grad_batch output span too small");
  for (double x : xs) require_finite_x(x);
  std::visit(Overloaded{
                 [&](const Quadratic& q) { kernels::quadratic_grad(xs, q.vertex, 2.0 * q.scale, out); },
                 [&](const Huber& h) { kernels::huber_grad(xs, h.vertex, h.slope / h.width, h.slope, out); },
                 [&](const PiecewiseLinearDerivative& p) {
                   for (std::size_t i = 0; i < xs.size(); ++i) out[i] = piecewise_grad(p, xs[i]);
                 },
             },
             f.shape());
}

ArgminInterval argmin_interval(const AdmissibleFunction& f) {
  return std::visit(
      Overloaded{
          [](const Quadratic& q) {
            if (!(q.scale > 0.0)) throw ArgumentError("quadratic with non-positive scale has no compact argmin");
            return ArgminInterval{q.vertex, q.vertex};
          },
          [](const Huber& h) {
            if (!(h.slope > 0.0)) throw ArgumentError("huber with non-positive slope has no compact argmin");
            return ArgminInterval{h.vertex, h.vertex};
          },
          [](const PiecewiseLinearDerivative& p) {
            const auto& bp = p.breakpoints;
            if (!(bp.front().derivative < 0.0 && bp.back().derivative > 0.0)) {
              throw ArgumentError("piecewise derivative must start negative and end positive");
            }
            // Leftmost point with derivative >= 0.
            double lo = bp.back().x;
            for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
              const Breakpoint& l = bp[k];
              const Breakpoint& r = bp[k + 1];
              if (l.derivative >= 0.0) {
                lo = l.x;
                break;
              }
              if (r.derivative >= 0.0) {
                lo = (r.derivative == 0.0) ? r.x : l.x + (-l.derivative) * ((r.x - l.x) / (r.derivative - l.derivative));
                break;
              }
            }
            // Rightmost point with derivative <= 0.
            double hi = bp.front().x;
            for (std::size_t k = bp.size() - 1; k > 0; --k) {
              const Breakpoint& l = bp[k - 1];
              const Breakpoint& r = bp[k];
              if (r.derivative <= 0.0) {
                hi = r.x;
                break;
              }
              if (l.derivative <= 0.0) {
                hi = (l.derivative == 0.0) ? l.x : r.x - r.derivative * ((r.x - l.x) / (r.derivative - l.derivative));
                break;
              }
            }
            if (hi < lo) std::swap(lo, hi);
            return ArgminInterval{lo, hi};
          },
      },
      f.shape());
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::NonFinite: return "non-finite";
    case ViolationKind::NonMonotoneDerivative: return "non-monotone derivative";
    case ViolationKind::Discontinuous: return "discontinuous derivative";
    case ViolationKind::UnboundedArgmin: return "unbounded argmin";
    case ViolationKind::LipschitzExceeded: return "lipschitz bound exceeded";
  }
  return "unknown";
}

bool AdmissibilityReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; });
}

AdmissibilityReport check_admissible(const AdmissibleFunction& f, const AdmissibilityOptions& options) {
  AdmissibilityReport report;
  auto add = [&report](ViolationKind kind, std::string detail) {
    if (!report.has(kind)) report.violations.push_back({kind, std::move(detail)});
  };
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };

  std::vector<double> anchors;
  double lo = 0.0;
  double hi = 0.0;

  // Symbolic checks where the family makes them exact.
  std::visit(Overloaded{
                 [&](const Quadratic& q) {
                   if (q.scale < 0.0) add(ViolationKind::NonMonotoneDerivative, "negative curvature " + fmt(q.scale));
                   if (!(q.scale > 0.0)) add(ViolationKind::UnboundedArgmin, "scale " + fmt(q.scale) + " is not positive");
                   if (f.lipschitz_bound()) add(ViolationKind::LipschitzExceeded, "quadratic derivative is unbounded");
                   const double half = 10.0 * (1.0 + std::fabs(q.vertex));
                   lo = q.vertex - half;
                   hi = q.vertex + half;
                   anchors.push_back(q.vertex);
                 },
                 [&](const Huber& h) {
                   if (h.slope < 0.0) add(ViolationKind::NonMonotoneDerivative, "negative slope " + fmt(h.slope));
                   if (!(h.slope > 0.0)) add(ViolationKind::UnboundedArgmin, "slope " + fmt(h.slope) + " is not positive");
                   if (f.lipschitz_bound() && std::fabs(h.slope) > *f.lipschitz_bound()) {
                     add(ViolationKind::LipschitzExceeded,
                         "|h'| reaches " + fmt(std::fabs(h.slope)) + " > " + fmt(*f.lipschitz_bound()));
                   }
                   const double half = 10.0 * (h.width + 1.0 + std::fabs(h.vertex));
                   lo = h.vertex - half;
                   hi = h.vertex + half;
                   anchors.insert(anchors.end(), {h.vertex - h.width, h.vertex, h.vertex + h.width});
                 },
                 [&](const PiecewiseLinearDerivative& p) {
                   const auto& bp = p.breakpoints;
                   for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
                     if (bp[k + 1].derivative < bp[k].derivative) {
                       add(ViolationKind::NonMonotoneDerivative,
                           "derivative decreases on [" + fmt(bp[k].x) + ", " + fmt(bp[k + 1].x) + "]");
                     }
                   }
                   if (!(bp.front().derivative < 0.0) || !(bp.back().derivative > 0.0)) {
                     add(ViolationKind::UnboundedArgmin, "outer derivatives " + fmt(bp.front().derivative) + ", " +
                                                             fmt(bp.back().derivative) + " do not change sign");
                   }
                   const double span = std::max(1.0, bp.back().x - bp.front().x);
                   lo = bp.front().x - span;
                   hi = bp.back().x + span;
                   for (const auto& b : bp) anchors.push_back(b.x);
                 },
             },
             f.shape());

  if (options.window) {
    lo = options.window->first;
    hi = options.window->second;
  }
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    add(ViolationKind::NonFinite, "invalid sampling window");
    return report;
  }

  // Sampled checks on the grid plus anchors, evaluated through the batch kernel.
  const std::size_t m = std::max<std::size_t>(options.grid_points, 2);
  std::vector<double> xs;
  xs.reserve(m + anchors.size());
  for (std::size_t i = 0; i < m; ++i) xs.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1));
  for (double a : anchors) {
    if (a >= lo && a <= hi) xs.push_back(a);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> gs(xs.size());
  grad_batch(f, xs, gs);

  const auto bound = f.lipschitz_bound();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(gs[i])) {
      add(ViolationKind::NonFinite, "derivative not finite at " + fmt(xs[i]));
      continue;
    }
    if (i > 0 && gs[i - 1] > gs[i] + options.monotone_slack) {
      add(ViolationKind::NonMonotoneDerivative, "h'(" + fmt(xs[i - 1]) + ") > h'(" + fmt(xs[i]) + ")");
    }
    if (bound && std::fabs(gs[i]) > *bound) {
      add(ViolationKind::LipschitzExceeded, "|h'(" + fmt(xs[i]) + ")| = " + fmt(std::fabs(gs[i])) + " > " + fmt(*bound));
    }
  }

  // Continuity probe at the anchors: the jump across a tiny window must
  // vanish with the window.
  constexpr double eps = 1e-9;
  for (double a : anchors) {
    const double jump = std::fabs(grad(f, a + eps) - grad(f, a - eps));
    const double jump_wide = std::fabs(grad(f, a + 1e3 * eps) - grad(f, a - 1e3 * eps));
    if (jump > options.continuity_tolerance && jump * 2.0 > jump_wide) {
      add(ViolationKind::Discontinuous, "derivative jumps by " + fmt(jump) + " at " + fmt(a));
    }
  }
  return report;
}

}  // namespace byzopt
