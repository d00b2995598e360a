#include "amlab/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace amlab::kernels {

std::string_view to_string(Isa isa) noexcept {
    return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

bool avx2_available() noexcept {
#if defined(AMLAB_HAVE_AVX2)
    static const bool available = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return available;
#else
    return false;
#endif
}

namespace {

Isa detect() noexcept {
    const char* force = std::getenv("AMLAB_FORCE_SCALAR");
    if (force != nullptr && std::strcmp(force, "0") != 0 && std::strlen(force) > 0) {
        return Isa::kScalar;
    }
    return avx2_available() ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& current() noexcept {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

} // namespace

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) noexcept {
    if (isa == Isa::kAvx2 && !avx2_available()) isa = Isa::kScalar;
    current().store(isa, std::memory_order_relaxed);
}

double weighted_frac_sum(double x, std::span<const double> shifts,
                         std::span<const double> weights) noexcept {
#if defined(AMLAB_HAVE_AVX2)
    if (active_isa() == Isa::kAvx2) return avx2::weighted_frac_sum(x, shifts, weights);
#endif
    return scalar::weighted_frac_sum(x, shifts, weights);
}

void frac_shifts(double x, std::span<const double> shifts, std::span<double> out) noexcept {
#if defined(AMLAB_HAVE_AVX2)
    if (active_isa() == Isa::kAvx2) return avx2::frac_shifts(x, shifts, out);
#endif
    scalar::frac_shifts(x, shifts, out);
}

std::complex<double> phase_sum(double lambda, std::span<const double> values) noexcept {
#if defined(AMLAB_HAVE_AVX2)
    if (active_isa() == Isa::kAvx2) return avx2::phase_sum(lambda, values);
#endif
    return scalar::phase_sum(lambda, values);
}

} // namespace amlab::kernels
