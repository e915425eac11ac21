#include "byzopt/impossibility.hpp"

#include "byzopt/errors.hpp"

namespace byzopt {

namespace {

Scenario base(const char* name, int n, int f, std::vector<AdmissibleFunction> fs, AgentSet faulty) {
  Scenario s;
  s.name = name;
  s.n = n;
  s.f = f;
  s.functions = std::move(fs);
  s.faulty = std::move(faulty);
  s.algorithm = Algorithm::Alg1;
  return s;
}

}  // namespace

std::vector<Scenario> impossibility_scenarios(int n, int f, int phi) {
  if (f < 1 || n <= 3 * f) throw ArgumentError("construction needs f >= 1 and n > 3f");
  if (phi < 1 || phi > f) throw ArgumentError("construction needs 1 <= phi <= f");

  std::vector<AdmissibleFunction> hull;
  for (int i = 1; i <= n; ++i) {
    if (i == 1) hull.push_back(AdmissibleFunction::quadratic(-1.0));
    else if (i == n) hull.push_back(AdmissibleFunction::quadratic(1.0));
    else hull.push_back(AdmissibleFunction::quadratic(0.0, 1.0, static_cast<double>(i)));
  }

  std::vector<AdmissibleFunction> gap;
  const double a = f + 1;
  for (int i = 1; i <= n; ++i) {
    bool spread = i <= f || i > n - phi;
    gap.push_back(AdmissibleFunction::quadratic(spread ? static_cast<double>(i) : a));
  }
  AgentSet last, first;
  for (int i = n - phi + 1; i <= n; ++i) last.insert(i);
  for (int i = 1; i <= f; ++i) first.insert(i);

  return {
      base("hull_singleton_a", n, f, hull, {n}),
      base("hull_singleton_b", n, f, hull, {1}),
      base("weight_gap_a", n, f, gap, last),
      base("weight_gap_b", n, f, gap, first),
  };
}

}  // namespace byzopt
