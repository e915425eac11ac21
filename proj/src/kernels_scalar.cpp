#include <algorithm>

#include "byzopt/kernels.hpp"

namespace byzopt::kernels::scalar {

void quadratic_grad(std::span<const double> xs, double vertex, double twice_scale, std::span<double> out) {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - vertex) * twice_scale;
}

void huber_grad(std::span<const double> xs, double vertex, double gain, double slope, std::span<double> out) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = (xs[i] - vertex) * gain;
    out[i] = std::min(std::max(v, -slope), slope);
  }
}

}  // namespace byzopt::kernels::scalar
