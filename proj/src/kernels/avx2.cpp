// AVX2 + FMA variants; this translation unit is compiled with -mavx2 -mfma and
// only entered after the runtime CPU check in dispatch.cpp.
#include "amlab/kernels/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace amlab::kernels::avx2 {

namespace {

inline __m256d shifted_frac(__m256d x, __m256d s) noexcept {
    const __m256d d = _mm256_sub_pd(x, s);
    const __m256d neg = _mm256_cmp_pd(d, _mm256_setzero_pd(), _CMP_LT_OQ);
    return _mm256_add_pd(d, _mm256_and_pd(neg, _mm256_set1_pd(1.0)));
}

inline double hsum(__m256d v) noexcept {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Cody-Waite reduction by pi/2 in four pieces, then the fdlibm kernels on
// [-pi/4, pi/4]. Valid for |x| < 2^40 or so, far beyond what Weyl sums need.
inline void sincos(__m256d x, __m256d& s_out, __m256d& c_out) noexcept {
    const __m256d two_over_pi = _mm256_set1_pd(6.36619772367581382433e-01);
    const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
    const __m256d t = _mm256_fmadd_pd(x, two_over_pi, magic);
    const __m256d k = _mm256_sub_pd(t, magic);
    const __m256i quadrant = _mm256_castpd_si256(t);

    __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(1.57079632673412561417e+00), x);
    r = _mm256_fnmadd_pd(k, _mm256_set1_pd(6.07710050630396597660e-11), r);
    r = _mm256_fnmadd_pd(k, _mm256_set1_pd(2.02226624871116645580e-21), r);
    r = _mm256_fnmadd_pd(k, _mm256_set1_pd(8.47842766036889956997e-32), r);

    const __m256d z = _mm256_mul_pd(r, r);

    __m256d ps = _mm256_set1_pd(1.58969099521155010221e-10);
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-2.50507602534068634195e-08));
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(2.75573137070700676789e-06));
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-1.98412698298579493134e-04));
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(8.33333333332248946124e-03));
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-1.66666666666666324348e-01));
    const __m256d sin_r = _mm256_fmadd_pd(_mm256_mul_pd(z, r), ps, r);

    __m256d pc = _mm256_set1_pd(-1.13596475577881948265e-11);
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(2.08757232129817482790e-09));
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(-2.75573143513906633035e-07));
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(2.48015872894767294178e-05));
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(-1.38888888888741095749e-03));
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(4.16666666666666019037e-02));
    const __m256d hz = _mm256_mul_pd(_mm256_set1_pd(0.5), z);
    const __m256d w = _mm256_sub_pd(_mm256_set1_pd(1.0), hz);
    const __m256d tail = _mm256_fmadd_pd(_mm256_mul_pd(z, z), pc,
                                         _mm256_sub_pd(_mm256_sub_pd(_mm256_set1_pd(1.0), w), hz));
    const __m256d cos_r = _mm256_add_pd(w, tail);

    const __m256i one = _mm256_set1_epi64x(1);
    const __m256i two = _mm256_set1_epi64x(2);
    const __m256d swap =
        _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(quadrant, one), one));
    const __m256d s = _mm256_blendv_pd(sin_r, cos_r, swap);
    const __m256d c = _mm256_blendv_pd(cos_r, sin_r, swap);
    const __m256i sin_sign = _mm256_slli_epi64(_mm256_and_si256(quadrant, two), 62);
    const __m256i cos_sign =
        _mm256_slli_epi64(_mm256_and_si256(_mm256_add_epi64(quadrant, one), two), 62);
    s_out = _mm256_xor_pd(s, _mm256_castsi256_pd(sin_sign));
    c_out = _mm256_xor_pd(c, _mm256_castsi256_pd(cos_sign));
}

} // namespace

double weighted_frac_sum(double x, std::span<const double> shifts,
                         std::span<const double> weights) noexcept {
    const std::size_t n = shifts.size();
    const __m256d xv = _mm256_set1_pd(x);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d f0 = shifted_frac(xv, _mm256_loadu_pd(shifts.data() + i));
        const __m256d f1 = shifted_frac(xv, _mm256_loadu_pd(shifts.data() + i + 4));
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(weights.data() + i), f0, acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(weights.data() + i + 4), f1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d f0 = shifted_frac(xv, _mm256_loadu_pd(shifts.data() + i));
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(weights.data() + i), f0, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = x - shifts[i];
        acc += weights[i] * (d < 0.0 ? d + 1.0 : d);
    }
    return acc;
}

void frac_shifts(double x, std::span<const double> shifts, std::span<double> out) noexcept {
    const std::size_t n = shifts.size();
    const __m256d xv = _mm256_set1_pd(x);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out.data() + i, shifted_frac(xv, _mm256_loadu_pd(shifts.data() + i)));
    }
    for (; i < n; ++i) {
        const double d = x - shifts[i];
        out[i] = d < 0.0 ? d + 1.0 : d;
    }
}

std::complex<double> phase_sum(double lambda, std::span<const double> values) noexcept {
    const std::size_t n = values.size();
    const __m256d lv = _mm256_set1_pd(lambda);
    __m256d re = _mm256_setzero_pd();
    __m256d im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d s;
        __m256d c;
        sincos(_mm256_mul_pd(lv, _mm256_loadu_pd(values.data() + i)), s, c);
        re = _mm256_add_pd(re, c);
        im = _mm256_add_pd(im, s);
    }
    double re_s = hsum(re);
    double im_s = hsum(im);
    for (; i < n; ++i) {
        const double arg = lambda * values[i];
        re_s += std::cos(arg);
        im_s += std::sin(arg);
    }
    return {re_s, im_s};
}

} // namespace amlab::kernels::avx2
