#include <cmath>
#include <random>

#include "byzopt/certificate.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace byzopt;

namespace {

using Derivs = std::vector<std::pair<AgentId, double>>;

Derivs non_faulty_derivs(const FunctionEnsemble& e, const AgentSet& faulty, double x) {
  Derivs out;
  for (AgentId id = 1; id <= e.n(); ++id)
    if (!faulty.count(id)) out.emplace_back(id, grad(e.at(id), x));
  return out;
}

// Does a literal LP-free check of a witness: non-negative, sums to one,
// stationary, at least gamma entries >= beta.
bool witness_ok(const WeightMap& w, const Derivs& d, const ValidFunctionSpec& spec, double tol) {
  oracle::wide sum = 0, stat = 0;
  int count = 0;
  for (auto [id, v] : d) {
    double a = w.at(id);
    if (a < 0) return false;
    sum += a;
    stat += static_cast<oracle::wide>(a) * v;
    if (a >= spec.beta - 1e-12) ++count;
  }
  return std::fabs(static_cast<double>(sum) - 1.0) <= 1e-9 && std::fabs(static_cast<double>(stat)) <= tol &&
         count >= spec.gamma;
}

}  // namespace

TEST_SUITE("certify") {

TEST_CASE("balanced construction on E1 with agent 4 faulty") {
  auto e = fixture::e1();
  TrimDecomposition d;
  auto derivs = e.derivatives(2.5);
  auto cert = extract_weights(derivs, 1, {4}, 2.5, Construction::Balanced, {}, &d);
  CHECK(d.top == std::vector<AgentId>{1});
  CHECK(d.bottom == std::vector<AgentId>{4});
  CHECK(d.middle == std::vector<AgentId>{2, 3});
  CHECK(d.top_honest.empty());
  CHECK(cert.weights.at(2) == 0.5);
  CHECK(cert.weights.at(3) == 0.5);
  CHECK(cert.weights.at(1) == 0.0);
  CHECK(cert.beta == 0.25);
  CHECK(cert.gamma == 2);
  CHECK(verify_certificate(cert, e, {4}).passed());
}

TEST_CASE("balanced construction on E1 with no faults") {
  auto e = fixture::e1();
  auto cert = extract_weights_balanced(e, {}, 2.5);
  CHECK(cert.beta == doctest::Approx(1.0 / 6));
  CHECK(cert.gamma == 3);
  auto r = verify_certificate(cert, e, {});
  CHECK(r.passed());
  CHECK(r.stationarity_residual <= 1e-9);
}

TEST_CASE("identical functions") {
  FunctionEnsemble e(std::vector<AdmissibleFunction>(7, AdmissibleFunction::quadratic(1.5)), 2);
  for (AgentSet faulty : {AgentSet{}, AgentSet{3}, AgentSet{1, 7}}) {
    CHECK(verify_certificate(extract_weights_balanced(e, faulty, 1.5), e, faulty).passed());
    CHECK(verify_certificate(extract_weights_rescaled(e, faulty, 1.5), e, faulty).passed());
  }
}

TEST_CASE("preconditions") {
  auto e = fixture::e1();
  CHECK_THROWS_AS(extract_weights_balanced(e, {}, 2.0), ArgumentError);
  CHECK_THROWS_AS(extract_weights_balanced(e, {1, 2}, 2.5), ArgumentError);
}

TEST_CASE("verify rejects a non-stationary certificate") {
  auto e = fixture::e1();
  WeightCertificate c{{{1, 0.0}, {2, 0.9}, {3, 0.1}}, 2.5, 0.25, 2, Construction::Manual};
  auto r = verify_certificate(c, e, {4});
  CHECK_FALSE(r.passed());
  CHECK_FALSE(r.find("stationarity")->passed);
  CHECK(r.find("stationarity")->measured == doctest::Approx(0.8));
  WeightCertificate outside{{{2, 0.5}, {4, 0.5}}, 3.0, 0.25, 2, Construction::Manual};
  CHECK_FALSE(verify_certificate(outside, e, {4}).find("support_non_faulty")->passed);
}

TEST_CASE("uniform weights at the average minimiser") {
  auto e = fixture::e1();
  WeightCertificate c{{{1, 0.25}, {2, 0.25}, {3, 0.25}, {4, 0.25}}, 2.5, 0.25, 4, Construction::Manual};
  CHECK(verify_certificate(c, e, {}).passed());
}

TEST_CASE("random ensembles: both constructions verify") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    int n = 4 + static_cast<int>(rng() % 9);
    int f = (n - 1) / 3;
    FunctionEnsemble e(fixture::random_functions(rng, n), f);
    int phi = static_cast<int>(rng() % static_cast<unsigned>(f + 1));
    AgentSet faulty;
    while (static_cast<int>(faulty.size()) < phi) faulty.insert(1 + static_cast<int>(rng() % n));
    for (auto mode : {RootMode::H, RootMode::RankSum}) {
      double x = solve_root(e, mode, 1e-10);
      auto c1 = extract_weights_balanced(e, faulty, x);
      auto r1 = verify_certificate(c1, e, faulty);
      CHECK(r1.passed());
      auto c2 = extract_weights_rescaled(e, faulty, x);
      CHECK(c2.beta == doctest::Approx(1.0 / n));
      CHECK(verify_certificate(c2, e, faulty).passed());
      auto spec = ValidFunctionSpec::tilde(n - phi, f);
      CHECK(y_membership(non_faulty_derivs(e, faulty, x), spec, 1e-8).feasible);
    }
  }
}

TEST_CASE("y_membership examples") {
  Derivs d{{1, 3}, {2, 1}, {3, -1}};
  auto r = y_membership(d, ValidFunctionSpec::custom(0.25, 2));
  REQUIRE(r.feasible);
  CHECK(witness_ok(*r.witness, d, ValidFunctionSpec::custom(0.25, 2), 1e-9));

  Derivs pos{{1, 2}, {2, 2}, {3, 2}};
  CHECK_FALSE(y_membership(pos, ValidFunctionSpec::custom(0.1, 1)).feasible);

  Derivs one{{1, 0}};
  auto single = y_membership(one, ValidFunctionSpec::custom(1.0, 1));
  REQUIRE(single.feasible);
  CHECK(single.witness->at(1) == 1.0);

  CHECK_THROWS_AS(y_membership(d, ValidFunctionSpec::custom(0.6, 2)), ArgumentError);
  CHECK_FALSE(y_membership(d, ValidFunctionSpec::custom(0.1, 4)).feasible);
}

TEST_CASE("y_membership swap chain agrees with enumeration") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int rep = 0; rep < 300; ++rep) {
    int m = 16 + static_cast<int>(rng() % 4);
    Derivs d;
    double shift = u(rng) * 0.8;
    for (int i = 1; i <= m; ++i) d.emplace_back(i, u(rng) + shift);
    int f = static_cast<int>(rng() % 5);
    auto spec = ValidFunctionSpec::tilde(m, f);
    auto fast = y_membership(d, spec);
    CHECK(fast.exact);
    // brute force: enumeration over all gamma-subsets of the same interval test
    bool brute = false;
    std::vector<double> v;
    for (auto [id, x] : d) v.push_back(x);
    double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
    double rest = 1 - spec.gamma * spec.beta;
    std::vector<int> pick(static_cast<std::size_t>(m), 0);
    std::fill(pick.end() - spec.gamma, pick.end(), 1);
    do {
      oracle::wide s = 0;
      for (int i = 0; i < m; ++i)
        if (pick[static_cast<std::size_t>(i)]) s += v[static_cast<std::size_t>(i)];
      double base = spec.beta * static_cast<double>(s);
      if (base + rest * lo <= 1e-9 && base + rest * hi >= -1e-9) brute = true;
    } while (!brute && std::next_permutation(pick.begin(), pick.end()));
    CHECK(fast.feasible == brute);
    if (fast.feasible) CHECK(witness_ok(*fast.witness, d, spec, 1e-8));
  }
}

TEST_CASE("Y is an interval on quadratic ensembles") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 30; ++rep) {
    int n = 4 + static_cast<int>(rng() % 5);
    int f = (n - 1) / 3;
    std::vector<AdmissibleFunction> fs;
    std::uniform_real_distribution<double> u(-5, 5), s(0.5, 2);
    for (int i = 0; i < n; ++i) fs.push_back(AdmissibleFunction::quadratic(u(rng), s(rng)));
    FunctionEnsemble e(fs, f);
    auto spec = ValidFunctionSpec::standard(n, f);
    int transitions = 0;
    bool prev = false;
    for (int i = 0; i <= 400; ++i) {
      double x = -6 + 12.0 * i / 400;
      bool in = y_membership(non_faulty_derivs(e, {}, x), spec).feasible;
      if (i > 0 && in != prev) ++transitions;
      prev = in;
    }
    CHECK(transitions <= 2);
  }
}

TEST_CASE("quadratic_weighted_optimum") {
  std::map<AgentId, Quadratic> q{{1, {1, 1, 0}}, {2, {2, 1, 0}}, {3, {3, 1, 0}}, {4, {4, 1, 0}}};
  CHECK(quadratic_weighted_optimum({{2, 0.5}, {3, 0.5}}, q) == 2.5);
  CHECK(quadratic_weighted_optimum({{1, 1.0}}, {{1, {7, 1, 0}}}) == 7.0);
  CHECK(quadratic_weighted_optimum({{1, 0.25}, {2, 0.25}, {3, 0.25}, {4, 0.25}}, q) == 2.5);
  CHECK_THROWS_AS(quadratic_weighted_optimum({{1, 0.0}}, q), ArgumentError);
}

}
