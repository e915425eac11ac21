#include "byzopt/trimmed_aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "byzopt/exact_sum.hpp"

namespace byzopt {

FunctionEnsemble::FunctionEnsemble(std::vector<AdmissibleFunction> functions, int f)
    : functions_(std::move(functions)), f_(f) {
  if (f_ < 0) throw ArgumentError("fault budget must be non-negative");
  if (!(n() > 3 * f_)) {
    throw ArgumentError("ensemble needs n > 3f (n = " + std::to_string(n()) + ", f = " + std::to_string(f_) + ")");
  }
  argmins_.reserve(functions_.size());
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    const auto report = check_admissible(functions_[i]);
    if (!report.ok()) {
      throw ArgumentError("function of agent " + std::to_string(i + 1) +
                          " is not admissible: " + to_string(report.violations.front().kind) + " (" +
                          report.violations.front().detail + ")");
    }
    argmins_.push_back(argmin_interval(functions_[i]));
  }
}

const AdmissibleFunction& FunctionEnsemble::at(AgentId id) const {
  if (id < 1 || id > n()) throw ArgumentError("agent id " + std::to_string(id) + " out of range");
  return functions_[static_cast<std::size_t>(id - 1)];
}

std::vector<double> FunctionEnsemble::derivatives(double x) const {
  std::vector<double> d;
  d.reserve(functions_.size());
  for (const auto& fn : functions_) d.push_back(grad(fn, x));
  return d;
}

namespace trim {

SignPartition partition(std::span<const double> derivs, double at_x) {
  SignPartition p;
  p.at_x = at_x;
  for (std::size_t i = 0; i < derivs.size(); ++i) {
    const AgentId id = static_cast<AgentId>(i + 1);
    if (derivs[i] > kZeroTolerance) {
      p.positive.push_back(id);
    } else if (derivs[i] < -kZeroTolerance) {
      p.negative.push_back(id);
    } else {
      p.zero.push_back(id);
    }
  }
  return p;
}

std::vector<std::size_t> order_non_increasing(std::span<const double> derivs) {
  std::vector<std::size_t> idx(derivs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return derivs[a] > derivs[b]; });
  return idx;
}

double positive_trimmed_sum(std::span<const double> derivs, int f) {
  std::vector<double> pos;
  for (double d : derivs) {
    if (d > kZeroTolerance) pos.push_back(d);
  }
  const std::size_t drop = std::min(pos.size(), static_cast<std::size_t>(std::max(f, 0)));
  std::sort(pos.begin(), pos.end(), std::greater<>());
  return exact_sum(std::span<const double>(pos).subspan(drop));
}

double negative_trimmed_sum(std::span<const double> derivs, int f) {
  std::vector<double> neg;
  for (double d : derivs) {
    if (d < -kZeroTolerance) neg.push_back(d);
  }
  const std::size_t drop = std::min(neg.size(), static_cast<std::size_t>(std::max(f, 0)));
  std::sort(neg.begin(), neg.end());
  return exact_sum(std::span<const double>(neg).subspan(drop));
}

double sign_trimmed_sum(std::span<const double> derivs, int f) {
  return positive_trimmed_sum(derivs, f) + negative_trimmed_sum(derivs, f);
}

double kth_largest(std::span<const double> derivs, int k) {
  if (k < 1 || k > static_cast<int>(derivs.size())) {
    throw ArgumentError("rank " + std::to_string(k) + " outside 1.." + std::to_string(derivs.size()));
  }
  std::vector<double> v(derivs.begin(), derivs.end());
  std::nth_element(v.begin(), v.begin() + (k - 1), v.end(), std::greater<>());
  return v[static_cast<std::size_t>(k - 1)];
}

namespace {

std::span<const double> middle(std::vector<double>& sorted, int f) {
  const auto n = static_cast<int>(sorted.size());
  if (f < 0 || n <= 2 * f) throw ArgumentError("trimming 2f values needs more than 2f inputs");
  return std::span<const double>(sorted).subspan(static_cast<std::size_t>(f), static_cast<std::size_t>(n - 2 * f));
}

}  // namespace

double rank_window_sum(std::span<const double> derivs, int f) {
  std::vector<double> v(derivs.begin(), derivs.end());
  std::sort(v.begin(), v.end(), std::greater<>());
  return exact_sum(middle(v, f));
}

double trimmed_mean(std::span<const double> values, int f) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto mid = middle(v, f);
  // the division can round just past the extremes (3 * 0.1 / 3)
  return std::clamp(exact_sum(mid) / static_cast<double>(mid.size()), mid.front(), mid.back());
}

double trimmed_midpoint(std::span<const double> values, int f) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto mid = middle(v, f);
  return 0.5 * (mid.front() + mid.back());
}

}  // namespace trim

SignPartition sign_partition(const FunctionEnsemble& e, double x) {
  return trim::partition(e.derivatives(x), x);
}

double trimmed_F(const FunctionEnsemble& e, double x) { return trim::positive_trimmed_sum(e.derivatives(x), e.f()); }

double trimmed_G(const FunctionEnsemble& e, double x) { return trim::negative_trimmed_sum(e.derivatives(x), e.f()); }

double H(const FunctionEnsemble& e, double x) { return trim::sign_trimmed_sum(e.derivatives(x), e.f()); }

double rank_gradient(const FunctionEnsemble& e, double x, int k) { return trim::kth_largest(e.derivatives(x), k); }

double rank_sum(const FunctionEnsemble& e, double x) { return trim::rank_window_sum(e.derivatives(x), e.f()); }

Bracket bracket(const FunctionEnsemble& e) {
  const auto& am = e.argmins();
  std::vector<std::size_t> idx(am.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto f = static_cast<std::size_t>(e.f());

  std::vector<std::size_t> by_max = idx;
  std::stable_sort(by_max.begin(), by_max.end(), [&](std::size_t a, std::size_t b) { return am[a].hi < am[b].hi; });
  std::vector<std::size_t> by_min = idx;
  std::stable_sort(by_min.begin(), by_min.end(), [&](std::size_t a, std::size_t b) { return am[a].lo > am[b].lo; });

  return Bracket{am[by_max[f]].hi, am[by_min[f]].lo};
}

double aggregate(const FunctionEnsemble& e, RootMode mode, double x) {
  return mode == RootMode::H ? H(e, x) : rank_sum(e, x);
}

RootResult solve_root_detailed(const FunctionEnsemble& e, RootMode mode, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("solver tolerance must be positive");
  const Bracket b = bracket(e);
  const double a_lo = aggregate(e, mode, b.lo);
  if (std::fabs(a_lo) <= tol) return {b.lo, a_lo, 0};
  const double a_hi = aggregate(e, mode, b.hi);
  if (std::fabs(a_hi) <= tol) return {b.hi, a_hi, 0};
  if (a_lo > 0.0 || a_hi < 0.0 || b.lo > b.hi) {
    throw BracketFailure("bracket [" + std::to_string(b.lo) + ", " + std::to_string(b.hi) +
                         "] does not straddle a root");
  }

  double lo = b.lo;
  double hi = b.hi;
  double r_lo = a_lo;
  double r_hi = a_hi;
  int it = 0;
  while (hi - lo > tol) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    ++it;
    const double r = aggregate(e, mode, mid);
    if (std::fabs(r) <= tol) return {mid, r, it};
    if (r < 0.0) {
      lo = mid;
      r_lo = r;
    } else {
      hi = mid;
      r_hi = r;
    }
  }
  return std::fabs(r_hi) < std::fabs(r_lo) ? RootResult{hi, r_hi, it} : RootResult{lo, r_lo, it};
}

double solve_root(const FunctionEnsemble& e, RootMode mode, double tol) {
  return solve_root_detailed(e, mode, tol).x;
}

namespace {

double simpson(const std::function<double(double)>& g, double a, double b, double fa, double fm, double fb, double whole,
               double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = g(lm);
  const double frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double big_H(const FunctionEnsemble& e, double c, double x, double tol) {
  if (x == c) return 0.0;
  if (x < c) return -big_H(e, x, c, tol);
  const std::function<double(double)> g = [&e](double t) { return H(e, t); };
  const double fa = g(c);
  const double fb = g(x);
  const double fm = g(0.5 * (c + x));
  const double whole = (x - c) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(g, c, x, fa, fm, fb, whole, tol, 50);
}

}  // namespace byzopt
