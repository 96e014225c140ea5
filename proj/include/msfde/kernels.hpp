#pragma once
// Diffusion kernel G(r_.) of the noise delay measure against the resolvent,
// its L^2 diagnostics, the exponentially weighted transform and its critical
// rate, and the renewal resolvent rho.

#include <optional>

#include "msfde/grid.hpp"
#include "msfde/measures.hpp"
#include "msfde/resolvent.hpp"

namespace msfde {

struct KernelTable {
    FunctionTable G;     // G(r_t) on [0, T]
    FunctionTable G_sq;  // G(r_t)^2
    double l2_norm_sq_truncated = 0.0;
    double l2_tail_estimate = 0.0;  // from an exponential fit on the tail
    double l2_norm_sq = 0.0;        // truncated + tail
    std::optional<double> g_decay_fit;  // log|G| slope over the last quarter
    bool tail_divergent = false;  // fit found a nondecaying tail; tail set 0
};

struct RhoTable {
    FunctionTable rho;  // on [0, T], nonnegative after clamping
    double l1_norm_truncated = 0.0;
    bool clamp_warning = false;  // some node fell below -1e-12 before clamping
};

// Weighted integrals over a finite horizon carry a divergence verdict
// instead of pretending the tail is known.
struct WeightedIntegral {
    double value = 0.0;  // truncated (plus tail where the op adds one)
    bool divergent = false;
};

KernelTable diffusion_kernel(const FiniteSignedMeasure& mu,
                             const ResolventTable& r);

// integral_0^T e^{2 lambda s} G^2(s) ds plus an exponential tail correction
// when the weighted integrand decays over the fit window.
WeightedIntegral gamma_transform(const KernelTable& k, double lambda);

// Unique lambda with gamma_transform == 1, located by bracket doubling plus
// bisection to |Gamma - 1| < 1e-8. Requires 0 < Gamma(0) < 1.
double critical_rate(const KernelTable& k);

// Renewal equation rho = G^2 + G^2 * rho by the shared Volterra march.
RhoTable renewal_rho(const KernelTable& k, const Grid& grid);

// Truncated integral_0^T e^{2 eps s} rho(s) ds with a tail-growth divergence
// flag; no tail correction is applied.
WeightedIntegral exp_weighted_rho_integral(const RhoTable& rho, double eps);

} // namespace msfde
