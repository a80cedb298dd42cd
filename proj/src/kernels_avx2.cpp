// AVX2 variants of the kernel table. Compiled with -mavx2 only; runtime
// dispatch happens in kernels.cpp. Multiplies and adds are kept separate
// (no FMA) so results match the scalar reference bit for bit.

#include "rml/kernels.hpp"

#if defined(RML_HAVE_AVX2)

#include <cmath>
#include <immintrin.h>

namespace rml::kernels {
namespace {

void k_scale(double* out, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = a * x[i];
}

void k_axpby(double* out, double a, const double* x, double b, const double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                        _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(out + i, t);
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void k_mul(double* out, const double* x, const double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void k_mul_acc(double* acc, const double* x, const double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_add_pd(
            _mm256_loadu_pd(acc + i),
            _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(acc + i, t);
    }
    for (; i < n; ++i) acc[i] = acc[i] + x[i] * y[i];
}

void k_accum_sq(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(v, v)));
    }
    for (; i < n; ++i) acc[i] = acc[i] + x[i] * x[i];
}

void k_diff_scaled(double* out, const double* xp, const double* xm, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(xp + i), _mm256_loadu_pd(xm + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vc, d));
    }
    for (; i < n; ++i) out[i] = c * (xp[i] - xm[i]);
}

void k_second_diff(double* out, const double* xp, const double* x0, const double* xm, double c,
                   std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_add_pd(
            _mm256_sub_pd(_mm256_loadu_pd(xp + i), _mm256_mul_pd(two, _mm256_loadu_pd(x0 + i))),
            _mm256_loadu_pd(xm + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vc, d));
    }
    for (; i < n; ++i) out[i] = c * (xp[i] - 2.0 * x0[i] + xm[i]);
}

// Matches the scalar 4-lane scheme: lane j holds the partial sum of
// indices == j mod 4; combine as (l0+l2) + (l1+l3).
double hsum_lanes(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);     // l0 l1
    const __m128d hi = _mm256_extractf128_pd(v, 1);   // l2 l3
    const __m128d s = _mm_add_pd(lo, hi);             // l0+l2, l1+l3
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double k_sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t m = n & ~static_cast<std::size_t>(3);
    std::size_t i = 0;
    for (; i < m; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double r = hsum_lanes(acc);
    for (; i < n; ++i) r += x[i];
    return r;
}

double k_sum_sq(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t m = n & ~static_cast<std::size_t>(3);
    std::size_t i = 0;
    for (; i < m; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
    }
    double r = hsum_lanes(acc);
    for (; i < n; ++i) r += x[i] * x[i];
    return r;
}

double k_max_abs(const double* x, std::size_t n) {
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc, _mm256_and_pd(abs_mask, _mm256_loadu_pd(x + i)));
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d s = _mm_max_pd(lo, hi);
    double r = _mm_cvtsd_f64(_mm_max_sd(s, _mm_unpackhi_pd(s, s)));
    for (; i < n; ++i) r = std::max(r, std::fabs(x[i]));
    return r;
}

double k_max_val(const double* x, std::size_t n) {
    double r = x[0];
    std::size_t i = 0;
    if (n >= 4) {
        __m256d acc = _mm256_loadu_pd(x);
        for (i = 4; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
        const __m128d lo = _mm256_castpd256_pd128(acc);
        const __m128d hi = _mm256_extractf128_pd(acc, 1);
        const __m128d s = _mm_max_pd(lo, hi);
        r = _mm_cvtsd_f64(_mm_max_sd(s, _mm_unpackhi_pd(s, s)));
    } else {
        i = 1;
    }
    for (; i < n; ++i) r = std::max(r, x[i]);
    return r;
}

double k_min_val(const double* x, std::size_t n) {
    double r = x[0];
    std::size_t i = 0;
    if (n >= 4) {
        __m256d acc = _mm256_loadu_pd(x);
        for (i = 4; i + 4 <= n; i += 4) acc = _mm256_min_pd(acc, _mm256_loadu_pd(x + i));
        const __m128d lo = _mm256_castpd256_pd128(acc);
        const __m128d hi = _mm256_extractf128_pd(acc, 1);
        const __m128d s = _mm_min_pd(lo, hi);
        r = _mm_cvtsd_f64(_mm_min_sd(s, _mm_unpackhi_pd(s, s)));
    } else {
        i = 1;
    }
    for (; i < n; ++i) r = std::min(r, x[i]);
    return r;
}

const Table table = {
    "avx2",      k_scale,   k_axpby,  k_mul,     k_mul_acc, k_accum_sq, k_diff_scaled,
    k_second_diff, k_sum,   k_sum_sq, k_max_abs, k_max_val, k_min_val,
};

} // namespace

const Table* avx2_table_impl() { return &table; }

} // namespace rml::kernels

#else

namespace rml::kernels {
const Table* avx2_table_impl() { return nullptr; }
} // namespace rml::kernels

#endif
