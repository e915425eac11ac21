#pragma once

// Batched derivative kernels. The scalar versions are the reference; the
// AVX2 versions use the same operation order and must match them bit for bit.

#include <span>

namespace byzopt::kernels {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);

/// Best instruction set the running CPU supports.
Isa detected_isa();

/// Instruction set used by the dispatching entry points. Honors the
/// BYZOPT_FORCE_SCALAR environment variable, then set_active_isa().
Isa active_isa();

/// Test hook; requesting Avx2 on a CPU without it falls back to Scalar.
void set_active_isa(Isa isa);

namespace scalar {
// out[i] = (xs[i] - vertex) * twice_scale
void quadratic_grad(std::span<const double> xs, double vertex, double twice_scale, std::span<double> out);
// out[i] = clamp((xs[i] - vertex) * gain, -slope, slope)
void huber_grad(std::span<const double> xs, double vertex, double gain, double slope, std::span<double> out);
}  // namespace scalar

namespace avx2 {
bool compiled();
void quadratic_grad(std::span<const double> xs, double vertex, double twice_scale, std::span<double> out);
void huber_grad(std::span<const double> xs, double vertex, double gain, double slope, std::span<double> out);
}  // namespace avx2

void quadratic_grad(std::span<const double> xs, double vertex, double twice_scale, std::span<double> out);
void huber_grad(std::span<const double> xs, double vertex, double gain, double slope, std::span<double> out);

}  // namespace byzopt::kernels
