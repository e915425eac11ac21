#include <cstring>
#include <random>
#include <vector>

#include "byzopt/convex_function.hpp"
#include "byzopt/kernels.hpp"
#include "doctest.h"

using namespace byzopt;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("avx2 matches scalar bit for bit") {
  if (!kernels::avx2::compiled() || kernels::detected_isa() != kernels::Isa::Avx2) {
    MESSAGE("avx2 unavailable, scalar only");
    return;
  }
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (std::size_t len : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 1023u}) {
    std::vector<double> xs(len);
    for (auto& x : xs) x = u(rng);
    if (len > 2) xs[1] = -0.0;
    std::vector<double> a(len), b(len);
    kernels::scalar::quadratic_grad(xs, 1.25, 2 * 0.7, a);
    kernels::avx2::quadratic_grad(xs, 1.25, 2 * 0.7, b);
    CHECK(same_bits(a, b));
    kernels::scalar::huber_grad(xs, -3.0, 2.0 / 0.3, 2.0, a);
    kernels::avx2::huber_grad(xs, -3.0, 2.0 / 0.3, 2.0, b);
    CHECK(same_bits(a, b));
  }
}

TEST_CASE("grad_batch equals pointwise grad under either isa") {
  std::vector<AdmissibleFunction> fs{AdmissibleFunction::quadratic(0.3, 1.7), AdmissibleFunction::huber(2, 3, 0.4),
                                     AdmissibleFunction::piecewise({{0, -1}, {1, 0}, {2, 2}})};
  std::vector<double> xs;
  for (int i = -500; i <= 500; ++i) xs.push_back(i * 0.013);
  auto previous = kernels::active_isa();
  for (auto isa : {kernels::Isa::Scalar, kernels::Isa::Avx2}) {
    kernels::set_active_isa(isa);
    for (const auto& f : fs) {
      std::vector<double> out(xs.size()), ref(xs.size());
      grad_batch(f, xs, out);
      for (std::size_t i = 0; i < xs.size(); ++i) ref[i] = grad(f, xs[i]);
      CHECK(same_bits(out, ref));
    }
  }
  kernels::set_active_isa(previous);
}

}
