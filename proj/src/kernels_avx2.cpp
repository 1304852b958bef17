// AVX2+FMA variants of the vector kernels. This TU is compiled with
// -mavx2 -mfma; it must only be entered after a runtime CPU check.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "splitlab/kernels.hpp"

namespace splitlab::kernels {
namespace {

constexpr std::size_t W = 4;  // doubles per __m256d

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline double hmin(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_min_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_min_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void axpy_v(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + W <= n; i += W) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_v(std::size_t n, double a, const double* x, double b, const double* y, double* out) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + W <= n; i += W) {
        __m256d s = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
        s = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), s);
        _mm256_storeu_pd(out + i, s);
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void scal_v(std::size_t n, double a, double* x) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + W <= n; i += W)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

double dot_v(std::size_t n, const double* x, const double* y) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + W <= n; i += W)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double diff_sumsq_v(std::size_t n, const double* x, const double* y) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + W <= n; i += W) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

void emadd_v(std::size_t n, const double* a, const double* x, double* y) {
    std::size_t i = 0;
    for (; i + W <= n; i += W) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a[i] * x[i];
}

double quad_flow_v(std::size_t n, double t, const double* u, double* out) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d vt = _mm256_set1_pd(t);
    __m256d vmin = one;
    std::size_t i = 0;
    for (; i + W <= n; i += W) {
        __m256d vu = _mm256_loadu_pd(u + i);
        __m256d den = _mm256_fnmadd_pd(vt, vu, one);  // 1 - t*u
        vmin = _mm256_min_pd(vmin, den);
        _mm256_storeu_pd(out + i, _mm256_div_pd(vu, den));
    }
    double dmin = hmin(vmin);
    for (; i < n; ++i) {
        const double den = 1.0 - t * u[i];
        if (den < dmin) dmin = den;
        out[i] = u[i] / den;
    }
    return dmin;
}

}  // namespace

const Ops avx2_ops = {"avx2", axpy_v,       axpby_v, scal_v,
                      dot_v,  diff_sumsq_v, emadd_v, quad_flow_v};

}  // namespace splitlab::kernels

#endif  // x86_64
