#include <cmath>
#include <limits>
#include <random>

#include "byzopt/convex_function.hpp"
#include "byzopt/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace byzopt;

TEST_SUITE("convexlib") {

TEST_CASE("eval closed forms") {
  CHECK(eval(AdmissibleFunction::quadratic(1, 1, 0), 0.0) == 1.0);
  CHECK(eval(AdmissibleFunction::quadratic(-1, 1, 0), -1.0) == 0.0);
  CHECK(eval(AdmissibleFunction::quadratic(0, 2, 3), 1.0) == 5.0);

  auto h = AdmissibleFunction::huber(0, 2, 1);
  // h(3) on the linear branch: 2*3 - 2*1/2
  CHECK(eval(h, 3.0) == doctest::Approx(5.0).epsilon(1e-15));
  double numeric = oracle::integrate([&](double t) { return grad(h, t); }, 0.0, 3.0);
  CHECK(eval(h, 3.0) == doctest::Approx(numeric).epsilon(1e-9));
  CHECK(eval(h, -0.5) == doctest::Approx(0.25));
}

TEST_CASE("piecewise primitive matches integral of its derivative") {
  auto p = AdmissibleFunction::piecewise({{-2, -3}, {0, 0}, {1, 0}, {3, 4}});
  for (double x : {-5.0, -1.0, 0.5, 2.0, 7.0}) {
    // integrate piece by piece so Simpson is exact on each linear segment
    double numeric = 0, from = -2.0;
    for (double cut : {0.0, 1.0, 3.0, x}) {
      double to = std::min(cut, x);
      if (x < from) to = x;
      if (to != from) numeric += oracle::integrate([&](double t) { return grad(p, t); }, from, to, 200);
      from = to;
      if (from == x) break;
    }
    CHECK(eval(p, x) == doctest::Approx(numeric).epsilon(1e-9));
  }
}

TEST_CASE("grad") {
  CHECK(grad(AdmissibleFunction::quadratic(2, 1, 0), 2.5) == 1.0);
  auto q = AdmissibleFunction::quadratic(1, 1, 0);
  double fd = (eval(q, 2.5 + 1e-6) - eval(q, 2.5 - 1e-6)) / 2e-6;
  CHECK(grad(q, 2.5) == 3.0);
  CHECK(std::fabs(fd - 3.0) <= 1e-6);
  CHECK(grad(AdmissibleFunction::huber(0, 2, 1), 5.0) == 2.0);
  CHECK(grad(AdmissibleFunction::huber(0, 2, 1), -5.0) == -2.0);
}

TEST_CASE("non-finite input is a domain error") {
  auto q = AdmissibleFunction::quadratic(0);
  CHECK_THROWS_AS(eval(q, std::numeric_limits<double>::quiet_NaN()), DomainError);
  CHECK_THROWS_AS(grad(q, std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("argmin intervals") {
  CHECK(argmin_interval(AdmissibleFunction::quadratic(4)) == ArgminInterval{4, 4});
  CHECK(argmin_interval(AdmissibleFunction::quadratic(-1)) == ArgminInterval{-1, -1});
  auto flat = AdmissibleFunction::piecewise({{0, -1}, {1, 0}, {2, 0}, {3, 1}});
  CHECK(argmin_interval(flat) == ArgminInterval{1, 2});
  CHECK(argmin_interval(AdmissibleFunction::huber(-3, 1, 0.5)) == ArgminInterval{-3, -3});
  // derivative never reaches zero: no compact argmin
  CHECK_THROWS_AS(argmin_interval(AdmissibleFunction::piecewise({{0, 1}, {1, 2}})), ArgumentError);
}

TEST_CASE("check_admissible") {
  CHECK(check_admissible(AdmissibleFunction::quadratic(0)).ok());
  auto concave = check_admissible(AdmissibleFunction::piecewise({{0, 1}, {1, -1}}));
  CHECK(concave.has(ViolationKind::NonMonotoneDerivative));
  auto lip = check_admissible(AdmissibleFunction::huber(0, 2, 1).with_lipschitz_bound(1.0));
  CHECK(lip.has(ViolationKind::LipschitzExceeded));
  CHECK(check_admissible(AdmissibleFunction::huber(0, 2, 1)).ok());
  CHECK(check_admissible(AdmissibleFunction::piecewise({{0, 1}, {1, 2}})).has(ViolationKind::UnboundedArgmin));
  CHECK_FALSE(check_admissible(AdmissibleFunction::quadratic(0, -1)).ok());
}

TEST_CASE("lipschitz bounds") {
  CHECK_FALSE(AdmissibleFunction::quadratic(0).lipschitz_bound().has_value());
  CHECK(AdmissibleFunction::huber(0, 2, 1).lipschitz_bound() == 2.0);
  auto p = AdmissibleFunction::piecewise({{0, -3}, {1, 0}, {2, 1}});
  CHECK(p.lipschitz_bound() == 3.0);
  auto declared = p.with_lipschitz_bound(5.0);
  CHECK(declared.lipschitz_bound() == 5.0);
  CHECK(declared.with_lipschitz_bound(std::nullopt).lipschitz_bound() == 3.0);
}

TEST_CASE("properties on random functions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int rep = 0; rep < 40; ++rep) {
    auto fs = fixture::random_functions(rng, 1);
    const auto& f = fs[0];
    for (int i = 0; i < 200; ++i) {
      double x = u(rng), y = u(rng);
      if (x > y) std::swap(x, y);
      CHECK(grad(f, x) <= grad(f, y) + 1e-12);
    }
    auto [lo, hi] = argmin_interval(f);
    CHECK(std::fabs(grad(f, lo)) <= 1e-12);
    CHECK(std::fabs(grad(f, hi)) <= 1e-12);
    CHECK(grad(f, lo - 1) < 0.0);
    CHECK(grad(f, hi + 1) > 0.0);
    for (int i = 0; i < 100; ++i) {
      double x = u(rng) / 3.0;
      double h = 1e-6;
      double fd = (eval(f, x + h) - eval(f, x - h)) / (2 * h);
      CHECK(std::fabs(grad(f, x) - fd) <= 1e-5);
    }
  }
}

}
