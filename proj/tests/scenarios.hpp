#pragma once

#include "byzopt/scenario.hpp"

namespace fixture {

inline byzopt::Scenario make(byzopt::Algorithm alg, std::vector<byzopt::AdmissibleFunction> fs, int f,
                             byzopt::AgentSet faulty = {}, byzopt::AdversarySpec adv = {}) {
  byzopt::Scenario s;
  s.n = static_cast<int>(fs.size());
  s.f = f;
  s.functions = std::move(fs);
  s.faulty = std::move(faulty);
  s.adversary = std::move(adv);
  s.algorithm = alg;
  return s;
}

inline std::vector<byzopt::AdmissibleFunction> quadratics(std::initializer_list<double> vertices) {
  std::vector<byzopt::AdmissibleFunction> fs;
  for (double a : vertices) fs.push_back(byzopt::AdmissibleFunction::quadratic(a));
  return fs;
}

inline std::vector<byzopt::AdmissibleFunction> hubers(std::initializer_list<double> vertices, double slope = 2.0,
                                                      double width = 1.0) {
  std::vector<byzopt::AdmissibleFunction> fs;
  for (double a : vertices) fs.push_back(byzopt::AdmissibleFunction::huber(a, slope, width));
  return fs;
}

inline byzopt::AdversarySpec adversary(byzopt::AdversaryKind kind) {
  byzopt::AdversarySpec a;
  a.kind = kind;
  return a;
}

}  // namespace fixture
