#include "amlab/kernels/kernels.hpp"

#include <doctest.h>

#include <random>
#include <vector>

using namespace amlab;

namespace {

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return v;
}

} // namespace

TEST_CASE("scalar frac shift reference") {
    const std::vector<double> shifts{0.0, 0.25, 0.75, 0.5};
    std::vector<double> out(4);
    kernels::scalar::frac_shifts(0.5, shifts, out);
    CHECK(out[0] == 0.5);
    CHECK(out[1] == 0.25);
    CHECK(out[2] == 0.75);
    CHECK(out[3] == 0.0);
    const std::vector<double> w{1.0, 2.0, 3.0, 4.0};
    CHECK(kernels::scalar::weighted_frac_sum(0.5, shifts, w) == doctest::Approx(0.5 + 0.5 + 2.25));
}

TEST_CASE("scalar phase sum reference") {
    const std::vector<double> v{0.0, 0.5, 1.0};
    const auto s = kernels::scalar::phase_sum(std::acos(-1.0), v);
    CHECK(s.real() == doctest::Approx(1.0 + 0.0 - 1.0).epsilon(1e-14));
    CHECK(s.imag() == doctest::Approx(1.0).epsilon(1e-14));
}

#if defined(AMLAB_HAVE_AVX2)
TEST_CASE("AVX2 variants match the scalar reference") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available on this CPU");
        return;
    }
    std::mt19937_64 rng(3);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 121u, 1000u}) {
        const auto shifts = uniform(rng, n);
        const auto weights = uniform(rng, n);
        for (int rep = 0; rep < 20; ++rep) {
            const double x = uniform(rng, 1)[0];
            std::vector<double> a(n), b(n);
            kernels::scalar::frac_shifts(x, shifts, a);
            kernels::avx2::frac_shifts(x, shifts, b);
            for (std::size_t i = 0; i < n; ++i) CHECK(a[i] == b[i]);
            CHECK(kernels::avx2::weighted_frac_sum(x, shifts, weights) ==
                  doctest::Approx(kernels::scalar::weighted_frac_sum(x, shifts, weights)).epsilon(1e-13));
        }
        const auto values = uniform(rng, n);
        for (double lambda : {1.0, 6.283185307179586, 100.0, 3141.0}) {
            const auto s = kernels::scalar::phase_sum(lambda, values);
            const auto v = kernels::avx2::phase_sum(lambda, values);
            CHECK(std::abs(s - v) <= 1e-12 * (1.0 + static_cast<double>(n)));
        }
    }
}

TEST_CASE("dispatch honours forced ISA") {
    kernels::force_isa(kernels::Isa::kScalar);
    CHECK(kernels::active_isa() == kernels::Isa::kScalar);
    kernels::force_isa(kernels::Isa::kAvx2);
    CHECK(kernels::active_isa() == (kernels::avx2_available() ? kernels::Isa::kAvx2 : kernels::Isa::kScalar));
}
#endif
