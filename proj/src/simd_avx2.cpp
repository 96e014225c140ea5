// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; only entered after
// the dispatcher has verified CPU support.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "msfde/simd.hpp"

namespace msfde::simd::detail {

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i),
                               _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                               _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i),
                               _mm256_loadu_pd(b + i), acc0);
    __m256d acc = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d sum2 = _mm_add_pd(lo, hi);
    double s = _mm_cvtsd_f64(_mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2)));
    for (; i < n; ++i) s = std::fma(a[i], b[i], s);
    return s;
}

void axpy_avx2(double w, const double* x, double* acc, std::size_t n) {
    const __m256d wv = _mm256_set1_pd(w);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_fmadd_pd(wv, _mm256_loadu_pd(x + i),
                                    _mm256_loadu_pd(acc + i));
        _mm256_storeu_pd(acc + i, v);
    }
    for (; i < n; ++i) acc[i] = std::fma(w, x[i], acc[i]);
}

void em_step_avx2(const double* x, const double* drift, const double* diff,
                  const double* db, double h, double* out, std::size_t n) {
    const __m256d hv = _mm256_set1_pd(h);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d base = _mm256_fmadd_pd(_mm256_loadu_pd(drift + i), hv,
                                       _mm256_loadu_pd(x + i));
        __m256d v = _mm256_fmadd_pd(_mm256_loadu_pd(diff + i),
                                    _mm256_loadu_pd(db + i), base);
        _mm256_storeu_pd(out + i, v);
    }
    for (; i < n; ++i)
        out[i] = std::fma(diff[i], db[i], std::fma(drift[i], h, x[i]));
}

} // namespace msfde::simd::detail
