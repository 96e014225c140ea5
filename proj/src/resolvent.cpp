#include "msfde/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "msfde/quadrature.hpp"

namespace msfde {

namespace {

// Coefficient of the not-yet-known newest node in (y * nu)(t): the atom at
// offset 0 plus the h/2 trapezoid edge of any density piece ending at 0.
double implicit_coefficient(const detail::IndexedMeasure& m, double h) {
    double c = 0.0;
    for (const auto& a : m.atoms)
        if (a.offset == 0) c += a.weight;
    for (const auto& p : m.pieces)
        if (p.right == 0) c += 0.5 * h * p.value;
    return c;
}

// (y * nu)(t_index) over a raw value array indexed from `lo_index`
// (zero-extended below). Only already-written entries are read when the
// newest slot is pre-zeroed. `origin_jump` is y(0) - y(0-): nonzero only for
// the resolvent convention (zero history, y(0) = 1), where a density window
// crossing the origin must not give the jump node the closing half-cell it
// would earn from a continuous integrand.
double conv_raw(const detail::IndexedMeasure& m,
                const std::vector<double>& vals, std::int64_t lo_index,
                std::int64_t t_index, double h, double origin_jump) {
    auto value_at = [&](std::int64_t j) {
        return j < lo_index ? 0.0
                            : vals[static_cast<std::size_t>(j - lo_index)];
    };
    double s = 0.0;
    for (const auto& a : m.atoms) s += a.weight * value_at(t_index + a.offset);
    for (const auto& p : m.pieces) {
        double acc =
            0.5 * (value_at(t_index + p.left) + value_at(t_index + p.right));
        for (std::int64_t j = p.left + 1; j < p.right; ++j)
            acc += value_at(t_index + j);
        if (origin_jump != 0.0 && p.left < -t_index && -t_index <= p.right)
            acc -= 0.5 * origin_jump;
        s += p.value * h * acc;
    }
    return s;
}

// Shared delay-equation march: y(0) and the history below 0 come from
// `history` (resolvent: empty history, y(0)=1; homogeneous solution: psi).
// Returns the values on [0, T]. With the resolvent convention the integrand
// (y * nu)(s) jumps where an atom echo crosses the origin; each step uses the
// right limit at its left node and the left limit at its right node so the
// jump never leaks half a cell of spurious area.
std::vector<double> march_delay_equation(const detail::IndexedMeasure& m,
                                         const Grid& grid,
                                         const std::vector<double>& history,
                                         double y0) {
    const double h = grid.h();
    const std::int64_t N = grid.n_steps();
    const std::int64_t nd = grid.n_delay();
    const double origin_jump = history.empty() ? y0 : 0.0;
    const double cimp = implicit_coefficient(m, h);
    const double denom = 1.0 - 0.5 * h * cimp;
    if (denom <= 1e-12)
        throw StepSizeError(
            "delay-equation march: implicit step 1 - (h/2)w0 is not positive; "
            "reduce the grid step h");

    // vals holds [-tau, T]; history fills [-tau, 0).
    std::vector<double> vals(static_cast<std::size_t>(nd + N + 1), 0.0);
    for (std::int64_t j = 0; j < nd; ++j)
        vals[static_cast<std::size_t>(j)] =
            history.empty() ? 0.0 : history[static_cast<std::size_t>(j)];
    vals[static_cast<std::size_t>(nd)] = y0;

    double c_prev = conv_raw(m, vals, -nd, 0, h, origin_jump);
    for (std::int64_t k = 0; k < N; ++k) {
        // Newest slot is still zero, so this is the explicit part of
        // (y * nu)(t_{k+1}).
        const double partial =
            conv_raw(m, vals, -nd, k + 1, h, origin_jump);
        double atom_jump = 0.0;
        if (origin_jump != 0.0)
            for (const auto& a : m.atoms)
                if (a.offset == -(k + 1)) atom_jump += a.weight * origin_jump;
        const double yk = vals[static_cast<std::size_t>(nd + k)];
        const double ynew =
            (yk + 0.5 * h * (c_prev + partial - atom_jump)) / denom;
        vals[static_cast<std::size_t>(nd + k + 1)] = ynew;
        c_prev = partial + cimp * ynew;
    }
    return std::vector<double>(vals.begin() + static_cast<std::ptrdiff_t>(nd),
                               vals.end());
}

} // namespace

ResolventTable solve_resolvent(const FiniteSignedMeasure& nu,
                               const Grid& grid) {
    detail::IndexedMeasure inu(nu, grid);
    std::vector<double> r = march_delay_equation(inu, grid, {}, 1.0);
    FunctionTable table(grid, 0, std::move(r));

    const std::size_t n = table.size();
    const std::size_t lo = (3 * (n - 1)) / 4;
    ResolventTable out{std::move(table), std::nullopt, lo, n - 1};
    if (auto fit = fit_log_slope(out.r.values(), 0.0, grid.h(), lo, n - 1))
        out.fitted_decay_rate = fit->slope;
    return out;
}

double characteristic_h(const FiniteSignedMeasure& nu, double lambda) {
    return lambda - measure_transform(nu, lambda);
}

CharacteristicReport estimate_v0(const FiniteSignedMeasure& nu,
                                 const ResolventTable& r, double bracket_lo,
                                 double bracket_hi) {
    if (!(bracket_lo < bracket_hi))
        throw DomainError("estimate_v0: bracket must satisfy lo < hi");
    CharacteristicReport rep;

    // Rightmost sign-changing segment wins; keeps multi-root measures honest.
    auto hfn = [&](double lam) { return characteristic_h(nu, lam); };
    const int segments = 64;
    const double step = (bracket_hi - bracket_lo) / segments;
    for (int i = segments - 1; i >= 0; --i) {
        const double a = bracket_lo + i * step;
        const double b = bracket_lo + (i + 1) * step;
        const double fa = hfn(a), fb = hfn(b);
        if (fa == 0.0) { rep.real_root = a; break; }
        if (fb == 0.0) { rep.real_root = b; break; }
        if ((fa < 0) != (fb < 0)) {
            rep.real_root = bisect(hfn, a, b, 1e-12 * std::max(1.0, std::abs(b)));
            break;
        }
    }

    if (r.fitted_decay_rate) {
        rep.decay_fit = *r.fitted_decay_rate;
        rep.verdict_stable = rep.decay_fit < 0.0;
    } else {
        // Everything in the fit window sits under the numerical floor: the
        // resolvent has already decayed past measurable, which is stability.
        rep.decay_below_floor = true;
        rep.decay_fit = 0.0;
        rep.verdict_stable = true;
    }
    rep.method = "decay-fit";
    if (rep.real_root && ((*rep.real_root < 0.0) == rep.verdict_stable))
        rep.method += "+real-root";
    return rep;
}

namespace {

// Inner integral of the variation-of-constants formula:
//   I(s) = integral_s^0 r(t + s - u) psi(u) du  (trapezoid over u-nodes).
// r(t + s - u) vanishes for u > t + s (zero extension with r(0) = 1), so the
// quadrature closes at the support edge min(0, t + s) instead of smearing
// the jump half a cell past it.
double voc_inner(const FunctionTable& r, const FunctionTable& psi,
                 std::int64_t t_index, std::int64_t s_index, double h) {
    if (s_index == 0) return 0.0;
    const std::int64_t hi = std::min<std::int64_t>(0, t_index + s_index);
    if (hi <= s_index) return 0.0;
    double acc = 0.5 * (r.at(t_index) * psi.at(s_index) +
                        r.at(t_index + s_index - hi) * psi.at(hi));
    for (std::int64_t j = s_index + 1; j < hi; ++j)
        acc += r.at(t_index + s_index - j) * psi.at(j);
    return h * acc;
}

} // namespace

FunctionTable homogeneous_x0(const FiniteSignedMeasure& nu,
                             const FunctionTable& psi,
                             const ResolventTable& r, const Grid& grid) {
    if (psi.start_index() != -grid.n_delay() || psi.end_index() != 0)
        throw DomainError("homogeneous_x0: psi must be tabulated on [-tau, 0]");
    detail::IndexedMeasure inu(nu, grid);
    const double h = grid.h();
    const std::int64_t N = grid.n_steps();
    const double psi0 = psi.at(0);

    // Variation-of-constants route.
    std::vector<double> voc(static_cast<std::size_t>(N + 1), 0.0);
    for (std::int64_t k = 0; k <= N; ++k) {
        double v = r.r.at(k) * psi0;
        for (const auto& a : inu.atoms)
            v += a.weight * voc_inner(r.r, psi, k, a.offset, h);
        for (const auto& p : inu.pieces) {
            double acc = 0.5 * (voc_inner(r.r, psi, k, p.left, h) +
                                voc_inner(r.r, psi, k, p.right, h));
            for (std::int64_t s = p.left + 1; s < p.right; ++s)
                acc += voc_inner(r.r, psi, k, s, h);
            v += p.value * h * acc;
        }
        voc[static_cast<std::size_t>(k)] = v;
    }

    // Direct march route at h and h/2 for the self-check tolerance.
    std::vector<double> hist(psi.values().begin(), psi.values().end() - 1);
    std::vector<double> march = march_delay_equation(inu, grid, hist, psi0);

    const Grid half(h / 2.0, grid.T(), grid.tau());
    detail::IndexedMeasure inu_half(nu, half);
    std::vector<double> hist_half(static_cast<std::size_t>(half.n_delay()));
    for (std::int64_t j = 0; j < half.n_delay(); ++j) {
        // Linear interpolation of psi at the half-step nodes.
        const std::int64_t lo = j / 2 - grid.n_delay();
        const double plo = psi.at(lo);
        hist_half[static_cast<std::size_t>(j)] =
            (j % 2 == 0) ? plo : 0.5 * (plo + psi.at(lo + 1));
    }
    std::vector<double> march_half =
        march_delay_equation(inu_half, half, hist_half, psi0);

    double halving_diff = 0.0, scale = 0.0;
    for (std::int64_t k = 0; k <= N; ++k) {
        const double a = march[static_cast<std::size_t>(k)];
        halving_diff = std::max(
            halving_diff,
            std::abs(a - march_half[static_cast<std::size_t>(2 * k)]));
        scale = std::max(scale, std::abs(a));
    }
    const double err_estimate = (4.0 / 3.0) * halving_diff;
    const double tol =
        10.0 * std::max(err_estimate, 1e-12 * std::max(scale, 1.0));
    for (std::int64_t k = 0; k <= N; ++k) {
        const double dev = std::abs(voc[static_cast<std::size_t>(k)] -
                                    march[static_cast<std::size_t>(k)]);
        if (dev > tol)
            throw ConsistencyError(
                "homogeneous_x0: variation-of-constants and direct march "
                "disagree beyond the scheme tolerance");
    }
    return FunctionTable(grid, 0, std::move(voc));
}

FunctionTable forced_x1(const ResolventTable& r, const FunctionTable& f,
                        const Grid& grid) {
    if (!(f.grid() == grid))
        throw DomainError("forced_x1: f must live on the given grid");
    return convolve_tables(r.r, f);
}

} // namespace msfde
