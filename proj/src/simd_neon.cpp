// NEON kernel variants for aarch64, where 128-bit NEON is baseline.

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "msfde/simd.hpp"

namespace msfde::simd::detail {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2)
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s = std::fma(a[i], b[i], s);
    return s;
}

void axpy_neon(double w, const double* x, double* acc, std::size_t n) {
    const float64x2_t wv = vdupq_n_f64(w);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(acc + i, vfmaq_f64(vld1q_f64(acc + i), wv, vld1q_f64(x + i)));
    for (; i < n; ++i) acc[i] = std::fma(w, x[i], acc[i]);
}

void em_step_neon(const double* x, const double* drift, const double* diff,
                  const double* db, double h, double* out, std::size_t n) {
    const float64x2_t hv = vdupq_n_f64(h);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t base =
            vfmaq_f64(vld1q_f64(x + i), vld1q_f64(drift + i), hv);
        float64x2_t v =
            vfmaq_f64(base, vld1q_f64(diff + i), vld1q_f64(db + i));
        vst1q_f64(out + i, v);
    }
    for (; i < n; ++i)
        out[i] = std::fma(diff[i], db[i], std::fma(drift[i], h, x[i]));
}

} // namespace msfde::simd::detail
