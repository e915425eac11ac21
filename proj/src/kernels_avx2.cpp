// Built with -mavx2 (see src/CMakeLists.txt); only entered after a runtime
// CPU check in kernels_dispatch.cpp.

#include "byzopt/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace byzopt::kernels::avx2 {

#if defined(__AVX2__)

bool compiled() { return true; }

void quadratic_grad(std::span<const double> xs, double vertex, double twice_scale, std::span<double> out) {
  const std::size_t n = xs.size();
  const __m256d a = _mm256_set1_pd(vertex);
  const __m256d k = _mm256_set1_pd(twice_scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(xs.data() + i);
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(_mm256_sub_pd(x, a), k));
  }
  for (; i < n; ++i) out[i] = (xs[i] - vertex) * twice_scale;
}

void huber_grad(std::span<const double> xs, double vertex, double gain, double slope, std::span<double> out) {
  const std::size_t n = xs.size();
  const __m256d a = _mm256_set1_pd(vertex);
  const __m256d k = _mm256_set1_pd(gain);
  const __m256d hi = _mm256_set1_pd(slope);
  const __m256d lo = _mm256_set1_pd(-slope);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(xs.data() + i);
    const __m256d v = _mm256_mul_pd(_mm256_sub_pd(x, a), k);
    _mm256_storeu_pd(out.data() + i, _mm256_min_pd(_mm256_max_pd(v, lo), hi));
  }
  for (; i < n; ++i) {
    const double v = (xs[i] - vertex) * gain;
    out[i] = v < -slope ? -slope : (v > slope ? slope : v);
  }
}

#else

bool compiled() { return false; }

void quadratic_grad(std::span<const double> xs, double vertex, double twice_scale, std::span<double> out) {
  scalar::quadratic_grad(xs, vertex, twice_scale, out);
}

void huber_grad(std::span<const double> xs, double vertex, double gain, double slope, std::span<double> out) {
  scalar::huber_grad(xs, vertex, gain, slope, out);
}

#endif

}  // namespace byzopt::kernels::avx2
