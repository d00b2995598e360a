#include "amlab/kernels/kernels.hpp"

#include <cmath>

namespace amlab::kernels::scalar {

namespace {

inline double shifted_frac(double x, double s) noexcept {
    const double d = x - s;
    return d < 0.0 ? d + 1.0 : d;
}

} // namespace

double weighted_frac_sum(double x, std::span<const double> shifts,
                         std::span<const double> weights) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < shifts.size(); ++i) acc += weights[i] * shifted_frac(x, shifts[i]);
    return acc;
}

void frac_shifts(double x, std::span<const double> shifts, std::span<double> out) noexcept {
    for (std::size_t i = 0; i < shifts.size(); ++i) out[i] = shifted_frac(x, shifts[i]);
}

std::complex<double> phase_sum(double lambda, std::span<const double> values) noexcept {
    double re = 0.0;
    double im = 0.0;
    for (double v : values) {
        const double arg = lambda * v;
        re += std::cos(arg);
        im += std::sin(arg);
    }
    return {re, im};
}

} // namespace amlab::kernels::scalar
