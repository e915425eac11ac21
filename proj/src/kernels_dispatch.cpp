#include <atomic>
#include <cstdlib>

#include "byzopt/kernels.hpp"

namespace byzopt::kernels {

namespace {

std::atomic<int> requested{-1};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detected_isa() { return (avx2::compiled() && cpu_has_avx2()) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() {
  if (std::getenv("BYZOPT_FORCE_SCALAR") != nullptr) return Isa::Scalar;
  const int r = requested.load(std::memory_order_relaxed);
  if (r < 0) return detected_isa();
  return (static_cast<Isa>(r) == Isa::Avx2) ? detected_isa() : Isa::Scalar;
}

void set_active_isa(Isa isa) { requested.store(static_cast<int>(isa), std::memory_order_relaxed); }

void quadratic_grad(std::span<const double> xs, double vertex, double twice_scale, std::span<double> out) {
  if (active_isa() == Isa::Avx2) {
    avx2::quadratic_grad(xs, vertex, twice_scale, out);
  } else {
    scalar::quadratic_grad(xs, vertex, twice_scale, out);
  }
}

void huber_grad(std::span<const double> xs, double vertex, double gain, double slope, std::span<double> out) {
  if (active_isa() == Isa::Avx2) {
    avx2::huber_grad(xs, vertex, gain, slope, out);
  } else {
    scalar::huber_grad(xs, vertex, gain, slope, out);
  }
}

}  // namespace byzopt::kernels
