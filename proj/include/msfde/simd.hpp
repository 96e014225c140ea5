#pragma once
// Runtime-dispatched vector kernels for the inner loops: dot products for the
// quadrature convolutions / Volterra marches, and elementwise FMA updates for
// the Monte Carlo paths. The scalar versions are the reference semantics.
//
// Rounding contract: dot/sum may reassociate, so callers must treat results
// as equal only up to summation-order tolerance. axpy and em_step perform the
// identical single-rounded FMA sequence per element in every ISA, so their
// results are bitwise equal across scalar/AVX2/NEON (the build compiles with
// -ffp-contract=off to keep the scalar reference honest).

#include <cstddef>
#include <span>

namespace msfde::simd {

enum class Isa { scalar, avx2, neon };

const char* isa_name(Isa isa);

// ISA picked at startup: best supported, unless the MSFDE_SIMD environment
// variable (scalar|avx2|neon) narrows it.
Isa active_isa();

// Test hook. Throws DomainError if the host cannot execute `isa`.
void force_isa(Isa isa);

bool isa_supported(Isa isa);

// sum_i a[i]*b[i] over n elements, dispatched on active_isa().
double dot(const double* a, const double* b, std::size_t n);
double dot(Isa isa, const double* a, const double* b, std::size_t n);

// acc[i] <- fma(w, x[i], acc[i]) for i < n; bitwise-identical across ISAs.
void axpy(double w, const double* x, double* acc, std::size_t n);
void axpy(Isa isa, double w, const double* x, double* acc, std::size_t n);

// Euler-Maruyama batch update across paths:
//   out[i] <- fma(diff[i], db[i], fma(drift[i], h, x[i]))
// bitwise-identical across ISAs.
void em_step(const double* x, const double* drift, const double* diff,
             const double* db, double h, double* out, std::size_t n);
void em_step(Isa isa, const double* x, const double* drift, const double* diff,
             const double* db, double h, double* out, std::size_t n);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double w, const double* x, double* acc, std::size_t n);
void em_step_scalar(const double* x, const double* drift, const double* diff,
                    const double* db, double h, double* out, std::size_t n);
#if defined(MSFDE_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double w, const double* x, double* acc, std::size_t n);
void em_step_avx2(const double* x, const double* drift, const double* diff,
                  const double* db, double h, double* out, std::size_t n);
#endif
#if defined(MSFDE_HAVE_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double w, const double* x, double* acc, std::size_t n);
void em_step_neon(const double* x, const double* drift, const double* diff,
                  const double* db, double h, double* out, std::size_t n);
#endif
} // namespace detail

} // namespace msfde::simd
