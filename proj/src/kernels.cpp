#include "msfde/kernels.hpp"

#include <cmath>
#include <vector>

#include "msfde/quadrature.hpp"

namespace msfde {

KernelTable diffusion_kernel(const FiniteSignedMeasure& mu,
                             const ResolventTable& r) {
    const Grid& grid = r.r.grid();
    detail::IndexedMeasure imu(mu, grid);
    const std::int64_t N = grid.n_steps();
    std::vector<double> g(static_cast<std::size_t>(N + 1));
    for (std::int64_t k = 0; k <= N; ++k) {
        double v = imu.convolve(r.r, k, grid.h());
        // r jumps from its zero extension to r(0) = 1; a density window
        // whose quadrature crosses that edge must not grant the edge node
        // the closing half-cell of a continuous integrand.
        for (const auto& p : imu.pieces)
            if (p.left < -k && -k <= p.right) v -= 0.5 * grid.h() * p.value;
        g[static_cast<std::size_t>(k)] = v;
    }

    FunctionTable G(grid, 0, std::move(g));
    FunctionTable G_sq = table_square(G);

    KernelTable out{std::move(G), std::move(G_sq), 0.0, 0.0, 0.0,
                    std::nullopt, false};
    out.l2_norm_sq_truncated = trapezoid(out.G_sq);

    const std::size_t n = out.G.size();
    const std::size_t lo = (3 * (n - 1)) / 4;
    if (auto fit = fit_log_slope(out.G.values(), 0.0, grid.h(), lo, n - 1)) {
        out.g_decay_fit = fit->slope;
        if (fit->slope < 0.0) {
            const double gT = out.G.values()[n - 1];
            out.l2_tail_estimate = gT * gT / (2.0 * -fit->slope);
        } else {
            out.tail_divergent = true;  // nondecaying tail: no credible tail
        }
    }
    out.l2_norm_sq = out.l2_norm_sq_truncated + out.l2_tail_estimate;
    return out;
}

WeightedIntegral gamma_transform(const KernelTable& k, double lambda) {
    const Grid& grid = k.G_sq.grid();
    const std::size_t n = k.G_sq.size();
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j)
        w[j] = std::exp(2.0 * lambda * grid.time(static_cast<std::int64_t>(j))) *
               k.G_sq.raw(j);
    FunctionTable wt(grid, 0, std::move(w));

    WeightedIntegral out;
    out.value = trapezoid(wt);
    const std::size_t lo = (3 * (n - 1)) / 4;
    if (auto fit =
            fit_log_slope(wt.values(), 0.0, grid.h(), lo, n - 1, 1e-300)) {
        if (fit->slope < 0.0)
            out.value += wt.values()[n - 1] / -fit->slope;
        else
            out.divergent = true;
    }
    return out;
}

double critical_rate(const KernelTable& k) {
    const double g0 = k.l2_norm_sq;
    if (g0 == 0.0)
        throw PreconditionError("critical rate: trivial kernel (G identically 0)");
    if (g0 >= 1.0)
        throw PreconditionError(
            "critical rate: kernel not subcritical (L2 norm squared >= 1)");

    const double rate =
        (k.g_decay_fit && *k.g_decay_fit < 0.0) ? -*k.g_decay_fit : 1.0;
    const double cap = 1024.0 * rate;

    // Double the upper end until Gamma crosses 1 (or its tail diverges,
    // which implies Gamma would exceed every bound).
    double lo = 0.0;
    double hi = rate / 4.0;
    for (;;) {
        const WeightedIntegral g = gamma_transform(k, hi);
        if (g.divergent || g.value >= 1.0) break;
        lo = hi;
        hi *= 2.0;
        if (hi > cap)
            throw PreconditionError(
                "critical rate: Gamma stayed below 1 up to the bracket cap");
    }

    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const WeightedIntegral g = gamma_transform(k, mid);
        if (!g.divergent && std::abs(g.value - 1.0) < 1e-8) return mid;
        if (g.divergent || g.value > 1.0)
            hi = mid;
        else
            lo = mid;
    }
    throw ConsistencyError(
        "critical rate: bisection failed to reach the Gamma tolerance");
}

RhoTable renewal_rho(const KernelTable& k, const Grid& grid) {
    if (!(k.G_sq.grid() == grid))
        throw DomainError("renewal_rho: kernel grid mismatch");
    FunctionTable rho = solve_volterra_second_kind(k.G_sq, k.G_sq);

    RhoTable out{std::move(rho), 0.0, false};
    for (double& v : out.rho.mutable_values()) {
        if (v < 0.0) {
            if (v < -1e-12) out.clamp_warning = true;
            v = 0.0;
        }
    }
    out.l1_norm_truncated = trapezoid(out.rho);
    return out;
}

WeightedIntegral exp_weighted_rho_integral(const RhoTable& rho, double eps) {
    if (eps < 0.0)
        throw DomainError("exp_weighted_rho_integral: eps must be >= 0");
    const Grid& grid = rho.rho.grid();
    const std::size_t n = rho.rho.size();
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j)
        w[j] = std::exp(2.0 * eps * grid.time(static_cast<std::int64_t>(j))) *
               rho.rho.raw(j);
    FunctionTable wt(grid, 0, std::move(w));

    WeightedIntegral out;
    out.value = trapezoid(wt);
    const std::size_t lo = (3 * (n - 1)) / 4;
    if (auto fit =
            fit_log_slope(wt.values(), 0.0, grid.h(), lo, n - 1, 1e-300)) {
        if (fit->slope >= 0.0) out.divergent = true;
    }
    return out;
}

} // namespace msfde
