#include "msfde/simd.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "msfde/errors.hpp"

namespace msfde::simd {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    // Four independent accumulators: same instruction-level parallelism shape
    // as the vector kernels, and the tolerance contract absorbs reassociation.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 = std::fma(a[i + 0], b[i + 0], s0);
        s1 = std::fma(a[i + 1], b[i + 1], s1);
        s2 = std::fma(a[i + 2], b[i + 2], s2);
        s3 = std::fma(a[i + 3], b[i + 3], s3);
    }
    for (; i < n; ++i) s0 = std::fma(a[i], b[i], s0);
    return (s0 + s1) + (s2 + s3);
}

void axpy_scalar(double w, const double* x, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] = std::fma(w, x[i], acc[i]);
}

void em_step_scalar(const double* x, const double* drift, const double* diff,
                    const double* db, double h, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::fma(diff[i], db[i], std::fma(drift[i], h, x[i]));
}

} // namespace detail

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(MSFDE_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") &&
                   __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
#if defined(MSFDE_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

namespace {

Isa detect_isa() {
    if (const char* env = std::getenv("MSFDE_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(env, "avx2") == 0 && isa_supported(Isa::avx2))
            return Isa::avx2;
        if (std::strcmp(env, "neon") == 0 && isa_supported(Isa::neon))
            return Isa::neon;
        return Isa::scalar;  // unknown or unsupported request: safe fallback
    }
    if (isa_supported(Isa::avx2)) return Isa::avx2;
    if (isa_supported(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

std::atomic<Isa>& active_slot() {
    static std::atomic<Isa> slot{detect_isa()};
    return slot;
}

} // namespace

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (!isa_supported(isa))
        throw DomainError(std::string("instruction set not available: ") +
                          isa_name(isa));
    active_slot().store(isa, std::memory_order_relaxed);
}

double dot(Isa isa, const double* a, const double* b, std::size_t n) {
    switch (isa) {
#if defined(MSFDE_HAVE_AVX2)
        case Isa::avx2: return detail::dot_avx2(a, b, n);
#endif
#if defined(MSFDE_HAVE_NEON)
        case Isa::neon: return detail::dot_neon(a, b, n);
#endif
        default: return detail::dot_scalar(a, b, n);
    }
}

void axpy(Isa isa, double w, const double* x, double* acc, std::size_t n) {
    switch (isa) {
#if defined(MSFDE_HAVE_AVX2)
        case Isa::avx2: detail::axpy_avx2(w, x, acc, n); return;
#endif
#if defined(MSFDE_HAVE_NEON)
        case Isa::neon: detail::axpy_neon(w, x, acc, n); return;
#endif
        default: detail::axpy_scalar(w, x, acc, n); return;
    }
}

void em_step(Isa isa, const double* x, const double* drift, const double* diff,
             const double* db, double h, double* out, std::size_t n) {
    switch (isa) {
#if defined(MSFDE_HAVE_AVX2)
        case Isa::avx2:
            detail::em_step_avx2(x, drift, diff, db, h, out, n);
            return;
#endif
#if defined(MSFDE_HAVE_NEON)
        case Isa::neon:
            detail::em_step_neon(x, drift, diff, db, h, out, n);
            return;
#endif
        default:
            detail::em_step_scalar(x, drift, diff, db, h, out, n);
            return;
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    return dot(active_isa(), a, b, n);
}

void axpy(double w, const double* x, double* acc, std::size_t n) {
    axpy(active_isa(), w, x, acc, n);
}

void em_step(const double* x, const double* drift, const double* diff,
             const double* db, double h, double* out, std::size_t n) {
    em_step(active_isa(), x, drift, diff, db, h, out, n);
}

} // namespace msfde::simd
