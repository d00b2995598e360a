#pragma once

#include <complex>
#include <span>
#include <string_view>

// Data-parallel inner loops. Each kernel has a scalar reference in
// amlab::kernels::scalar and, on x86-64, an AVX2+FMA variant in
// amlab::kernels::avx2. The unqualified entry points dispatch at runtime.
namespace amlab::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa) noexcept;

/// True when the CPU supports AVX2 and FMA and the variant was compiled in.
bool avx2_available() noexcept;

/// ISA used by the dispatching entry points. Defaults to the best available one;
/// AMLAB_FORCE_SCALAR=1 in the environment selects the scalar path.
Isa active_isa() noexcept;

/// Overrides dispatch (falls back to scalar if the request is unavailable).
void force_isa(Isa isa) noexcept;

/// sum_i weights[i] * frac(x - shifts[i]), with x and shifts in [0,1).
double weighted_frac_sum(double x, std::span<const double> shifts,
                         std::span<const double> weights) noexcept;

/// out[i] = frac(x - shifts[i]).
void frac_shifts(double x, std::span<const double> shifts, std::span<double> out) noexcept;

/// sum_m exp(i * lambda * values[m]).
std::complex<double> phase_sum(double lambda, std::span<const double> values) noexcept;

namespace scalar {
double weighted_frac_sum(double x, std::span<const double> shifts,
                         std::span<const double> weights) noexcept;
void frac_shifts(double x, std::span<const double> shifts, std::span<double> out) noexcept;
std::complex<double> phase_sum(double lambda, std::span<const double> values) noexcept;
} // namespace scalar

#if defined(AMLAB_HAVE_AVX2)
namespace avx2 {
double weighted_frac_sum(double x, std::span<const double> shifts,
                         std::span<const double> weights) noexcept;
void frac_shifts(double x, std::span<const double> shifts, std::span<double> out) noexcept;
std::complex<double> phase_sum(double lambda, std::span<const double> values) noexcept;
} // namespace avx2
#endif

} // namespace amlab::kernels
