#include "msfde/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "msfde/errors.hpp"
#include "msfde/format.hpp"
#include "msfde/quadrature.hpp"

namespace msfde {

namespace {

std::string num(double x) { return format_double(x, 6); }

void require_horizon_table(const FunctionTable& t, const Grid& grid,
                           const char* name, const char* where) {
    if (!(t.grid() == grid) || t.start_index() != 0 ||
        t.end_index() != grid.n_steps())
        throw DomainError(std::string(where) + ": " + name +
                          " must be tabulated on [0, T] of the given grid");
}

// Trend verdict for one nonnegative statistic table. The tolerance is
// scale-relative (taken from the front-quarter peak); PASS needs either a
// sub-tolerance tail with nonincreasing quarter maxima, or a clear
// geometric-decay trend when the horizon is too short for the tail to reach
// the tolerance; FAIL needs a tail at or above tolerance with nondecreasing
// quarter maxima.
TailTrend diagnose_tail_trend(const FunctionTable& stat, const Grid& grid) {
    TailTrend t;
    const auto vals = stat.values();
    const std::size_t n = vals.size();
    const std::int64_t front_hi =
        std::min<std::int64_t>(stat.end_index(), grid.n_steps() / 4);
    double all_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::abs(vals[i]);
        all_max = std::max(all_max, a);
        if (static_cast<std::int64_t>(i) + stat.start_index() <= front_hi)
            t.peak_front = std::max(t.peak_front, a);
    }
    t.tol_abs = 1e-3 * t.peak_front;
    t.quarters = quarter_maxima(vals, 0, n - 1);
    t.tail_sup = t.quarters[3];

    if (all_max == 0.0) {
        t.verdict = Verdict::PASS;  // identically zero statistic
        return t;
    }
    const auto& q = t.quarters;
    bool nonincreasing = true, nondecreasing = true, decaying = true;
    for (int i = 0; i < 3; ++i) {
        if (q[i + 1] > q[i] * (1.0 + 1e-12)) nonincreasing = false;
        if (q[i + 1] < q[i] * (1.0 - 1e-9)) nondecreasing = false;
        if (q[i + 1] > 0.99 * q[i]) decaying = false;
    }
    const bool halved = t.tail_sup <= 0.5 * q[0];
    if (t.tail_sup < t.tol_abs && nonincreasing)
        t.verdict = Verdict::PASS;
    else if (decaying && halved)
        t.verdict = Verdict::PASS;
    else if (t.tail_sup >= t.tol_abs && nondecreasing)
        t.verdict = Verdict::FAIL;
    else
        t.verdict = Verdict::INCONCLUSIVE;
    return t;
}

std::string trend_evidence(const TailTrend& t) {
    std::ostringstream os;
    os << "tail sup " << num(t.tail_sup) << " vs tol " << num(t.tol_abs)
       << ", quarter maxima [" << num(t.quarters[0]) << ", "
       << num(t.quarters[1]) << ", " << num(t.quarters[2]) << ", "
       << num(t.quarters[3]) << "]";
    return os.str();
}

Verdict fold(const std::vector<Verdict>& vs) {
    Verdict out = Verdict::PASS;
    for (Verdict v : vs) out = combine_verdicts(out, v);
    return out;
}

} // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::PASS: return "PASS";
        case Verdict::FAIL: return "FAIL";
        case Verdict::INCONCLUSIVE: return "INCONCLUSIVE";
    }
    return "?";
}

Verdict combine_verdicts(Verdict a, Verdict b) {
    if (a == Verdict::FAIL || b == Verdict::FAIL) return Verdict::FAIL;
    if (a == Verdict::INCONCLUSIVE || b == Verdict::INCONCLUSIVE)
        return Verdict::INCONCLUSIVE;
    return Verdict::PASS;
}

FunctionTable sectional_average(const FunctionTable& f, double delta,
                                const Grid& grid) {
    require_horizon_table(f, grid, "f", "sectional_average");
    if (!(delta > 0.0))
        throw DomainError("sectional_average: window delta must be positive");
    if (delta > 1.0 + 1e-9 * grid.h())
        throw DomainError("sectional_average: window delta must be at most 1");
    const std::int64_t d =
        aligned_index(delta, grid.h(), "sectional average window delta");
    if (d > grid.n_steps())
        throw DomainError("sectional_average: window exceeds the horizon");
    // Windows are differences of the compensated running integral; trapezoid
    // additivity makes this exactly the per-window trapezoid rule.
    const FunctionTable I = running_integral(f);
    const std::size_t m = static_cast<std::size_t>(grid.n_steps() - d) + 1;
    std::vector<double> out(m);
    for (std::size_t k = 0; k < m; ++k)
        out[k] = I.raw(k + static_cast<std::size_t>(d)) - I.raw(k);
    return FunctionTable(grid, 0, std::move(out));
}

FunctionTable exp_filter(const FunctionTable& f, double beta,
                         const Grid& grid) {
    require_horizon_table(f, grid, "f", "exp_filter");
    if (!(beta > 0.0))
        throw DomainError("exp_filter: beta must be positive");
    const double h = grid.h();
    const double decay = std::exp(-beta * h);
    std::vector<double> u(f.size());
    u[0] = 0.0;
    for (std::size_t k = 0; k + 1 < u.size(); ++k)
        u[k + 1] = decay * u[k] + 0.5 * h * (decay * f.raw(k) + f.raw(k + 1));
    return FunctionTable(grid, 0, std::move(u));
}

std::vector<double> default_delta_set() { return {0.125, 0.25, 0.5, 1.0}; }

std::vector<double> default_beta_grid() {
    return {0.0625, 0.125, 0.25, 0.5, 1.0, 2.0};
}

VanishingAverageEvidence check_vanishing_average_conditions(
    const FunctionTable& f, const FunctionTable& g, const Grid& grid,
    const std::vector<double>& delta_set) {
    require_horizon_table(f, grid, "f", "vanishing-average check");
    require_horizon_table(g, grid, "g", "vanishing-average check");
    if (grid.T() < 8.0 - 1e-9 * grid.h())
        throw InsufficientHorizonError(
            "vanishing-average check: horizon of at least 8 time units "
            "required, got T = " +
            format_double(grid.T(), 6));
    if (delta_set.empty())
        throw DomainError("vanishing-average check: empty delta set");

    VanishingAverageEvidence ev;
    std::vector<Verdict> f_verdicts;
    for (double delta : delta_set) {
        const FunctionTable stat =
            table_abs(sectional_average(f, delta, grid));
        TailTrend trend = diagnose_tail_trend(stat, grid);
        f_verdicts.push_back(trend.verdict);
        ev.f_per_delta.emplace_back(delta, trend);
    }
    ev.f_filter =
        diagnose_tail_trend(table_abs(exp_filter(f, 1.0, grid)), grid);
    ev.g_window =
        diagnose_tail_trend(sectional_average(table_square(g), 1.0, grid),
                            grid);
    ev.f_verdict = fold(f_verdicts);
    ev.g_verdict = ev.g_window.verdict;
    return ev;
}

ExponentialWeightEvidence check_exponential_weight_conditions(
    const FunctionTable& f, const FunctionTable& g, const Grid& grid,
    const std::vector<double>& beta_grid) {
    require_horizon_table(f, grid, "f", "exponential-weight check");
    require_horizon_table(g, grid, "g", "exponential-weight check");
    if (beta_grid.empty())
        throw DomainError("exponential-weight check: empty beta grid");
    for (std::size_t i = 0; i < beta_grid.size(); ++i) {
        if (!(beta_grid[i] > 0.0))
            throw DomainError(
                "exponential-weight check: beta values must be positive");
        if (i > 0 && !(beta_grid[i] > beta_grid[i - 1]))
            throw DomainError(
                "exponential-weight check: beta grid must be ascending");
    }

    ExponentialWeightEvidence ev;
    const std::size_t n = f.size();
    for (double beta : beta_grid) {
        WeightedBoundEvidence e;
        e.beta = beta;

        // f side: running weighted integral must stay bounded, i.e. its
        // global maximum must not sit at the end of the horizon.
        std::vector<double> w(n);
        for (std::size_t k = 0; k < n; ++k)
            w[k] = std::exp(beta * grid.time(static_cast<std::int64_t>(k))) *
                   f.raw(k);
        const FunctionTable R =
            running_integral(FunctionTable(grid, 0, std::move(w)));
        std::size_t argmax = 0;
        double bound = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double a = std::abs(R.raw(k));
            if (a > bound) {
                bound = a;
                argmax = k;
            }
        }
        e.f_bound = bound;
        e.f_argmax = argmax;
        e.f_argmax_frac =
            n > 1 ? static_cast<double>(argmax) / static_cast<double>(n - 1)
                  : 0.0;
        if (e.f_argmax_frac <= 0.90)
            e.f_verdict = Verdict::PASS;
        else if (e.f_argmax_frac >= 0.95)
            e.f_verdict = Verdict::FAIL;
        else
            e.f_verdict = Verdict::INCONCLUSIVE;

        // g side: weighted integral of g^2 with a tail-growth divergence
        // test on the weighted integrand.
        std::vector<double> wg(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double gv = g.raw(k);
            wg[k] = std::exp(2.0 * beta *
                             grid.time(static_cast<std::int64_t>(k))) *
                    gv * gv;
        }
        const FunctionTable Wg(grid, 0, std::move(wg));
        e.g_weighted_integral = trapezoid(Wg);
        const auto fit = fit_log_slope(Wg.values(), 0.0, grid.h(),
                                       3 * (n - 1) / 4, n - 1);
        if (!fit) {
            e.g_divergent = false;  // integrand under the floor everywhere
            e.g_verdict = Verdict::PASS;
        } else if (fit->slope * grid.T() < -1e-6) {
            // A borderline-flat integrand (slope 0 up to rounding) means the
            // weighted integral grows without bound: only a genuinely
            // negative trend counts as integrable.
            e.g_divergent = false;
            e.g_verdict = Verdict::PASS;
        } else {
            e.g_divergent = true;
            e.g_verdict = Verdict::FAIL;
        }
        ev.per_beta.push_back(e);
    }

    bool any_f_pass = false, any_g_pass = false, any_both = false;
    bool all_pairs_fail = true;
    std::vector<Verdict> fs, gs;
    for (const auto& e : ev.per_beta) {
        fs.push_back(e.f_verdict);
        gs.push_back(e.g_verdict);
        if (e.f_verdict == Verdict::PASS) {
            any_f_pass = true;
            ev.best_f_beta = e.beta;  // grid ascending: keeps the largest
        }
        if (e.g_verdict == Verdict::PASS) {
            any_g_pass = true;
            ev.best_g_beta = e.beta;
        }
        if (e.f_verdict == Verdict::PASS && e.g_verdict == Verdict::PASS)
            any_both = true;
        if (e.f_verdict != Verdict::FAIL && e.g_verdict != Verdict::FAIL)
            all_pairs_fail = false;
    }
    ev.f_verdict = any_f_pass ? Verdict::PASS
                              : (std::all_of(fs.begin(), fs.end(),
                                             [](Verdict v) {
                                                 return v == Verdict::FAIL;
                                             })
                                     ? Verdict::FAIL
                                     : Verdict::INCONCLUSIVE);
    ev.g_verdict = any_g_pass ? Verdict::PASS
                              : (std::all_of(gs.begin(), gs.end(),
                                             [](Verdict v) {
                                                 return v == Verdict::FAIL;
                                             })
                                     ? Verdict::FAIL
                                     : Verdict::INCONCLUSIVE);
    ev.overall = any_both ? Verdict::PASS
                          : (all_pairs_fail ? Verdict::FAIL
                                            : Verdict::INCONCLUSIVE);

    // Boundedness at a weight beta* forces boundedness at every smaller
    // weight with at most twice the bound; flag data that violates this.
    if (ev.best_f_beta) {
        double b_star = 0.0;
        for (const auto& e : ev.per_beta)
            if (e.beta == *ev.best_f_beta) b_star = e.f_bound;
        for (const auto& e : ev.per_beta) {
            if (e.beta >= *ev.best_f_beta) continue;
            const double cap = 2.0 * b_star * (1.0 + 1e-6) + 1e-12;
            if (e.f_verdict == Verdict::FAIL || e.f_bound > cap) {
                ev.monotone_bound_ok = false;
                ev.monotone_note +=
                    "beta " + num(e.beta) + " bound " + num(e.f_bound) +
                    " exceeds twice the bound " + num(b_star) + " at beta " +
                    num(*ev.best_f_beta) + "; ";
            }
        }
    } else {
        ev.monotone_note = "no passing beta to anchor the bound";
    }
    return ev;
}

SquareIntegrabilityEvidence check_square_integrability_conditions(
    const FunctionTable& f, const FunctionTable& g, const Grid& grid) {
    require_horizon_table(f, grid, "f", "square-integrability check");
    require_horizon_table(g, grid, "g", "square-integrability check");

    const FunctionTable u = exp_filter(f, 1.0, grid);
    const FunctionTable U = running_integral(table_square(u));
    const FunctionTable Gi = running_integral(table_square(g));

    const std::size_t last = U.size() - 1;
    const auto increments = [last](const FunctionTable& I) {
        std::array<double, 4> inc{};
        std::size_t prev = 0;
        for (int j = 1; j <= 4; ++j) {
            const std::size_t idx = last * static_cast<std::size_t>(j) / 4;
            inc[j - 1] = I.raw(idx) - I.raw(prev);
            prev = idx;
        }
        return inc;
    };
    // A convergent integral shows geometrically shrinking quarter
    // increments; a bounded-below integrand keeps them level.
    const auto side_verdict = [](const std::array<double, 4>& inc) {
        const double total = inc[0] + inc[1] + inc[2] + inc[3];
        if (total <= 0.0) return Verdict::PASS;  // identically zero
        bool shrinking = true;
        for (int i = 0; i < 3; ++i)
            if (inc[i + 1] > 0.75 * std::max(inc[i], 1e-300))
                shrinking = false;
        if (shrinking) return Verdict::PASS;
        if (inc[3] >= 0.95 * std::max(inc[2], 1e-300)) return Verdict::FAIL;
        return Verdict::INCONCLUSIVE;
    };

    SquareIntegrabilityEvidence ev;
    ev.filtered_f_sq_increments = increments(U);
    ev.g_sq_increments = increments(Gi);
    ev.filtered_f_sq_total = U.raw(last);
    ev.g_sq_total = Gi.raw(last);
    ev.f_verdict = side_verdict(ev.filtered_f_sq_increments);
    ev.g_verdict = side_verdict(ev.g_sq_increments);
    return ev;
}

namespace {

ConditionReport make_cond_i(const FiniteSignedMeasure& nu,
                            const ResolventTable& r) {
    const CharacteristicReport cr = estimate_v0(nu, r, -64.0, 64.0);
    ConditionReport c;
    c.verdict = cr.verdict_stable ? Verdict::PASS : Verdict::FAIL;
    std::ostringstream os;
    os << "resolvent decay fit " << num(cr.decay_fit);
    if (cr.decay_below_floor) os << " (amplitude under numeric floor)";
    if (cr.real_root)
        os << ", rightmost real characteristic root " << num(*cr.real_root);
    else
        os << ", no real characteristic root in [-64, 64]";
    os << ", method " << cr.method;
    c.evidence = os.str();
    return c;
}

ConditionReport make_cond_ii(const KernelTable& k) {
    ConditionReport c;
    std::ostringstream os;
    os << "kernel L2 norm squared " << num(k.l2_norm_sq) << " (truncated "
       << num(k.l2_norm_sq_truncated) << " + tail "
       << num(k.l2_tail_estimate) << ")";
    if (k.tail_divergent) {
        os << ", kernel tail appears nondecaying";
        c.verdict = k.l2_norm_sq_truncated >= 1.0 ? Verdict::FAIL
                                                  : Verdict::INCONCLUSIVE;
    } else if (std::abs(k.l2_norm_sq - 1.0) < 10.0 * k.l2_tail_estimate) {
        os << ", within tail-estimate margin of the threshold 1";
        c.verdict = Verdict::INCONCLUSIVE;
    } else {
        c.verdict = k.l2_norm_sq < 1.0 ? Verdict::PASS : Verdict::FAIL;
    }
    c.evidence = os.str();
    return c;
}

Verdict group_overall(const ConditionGroupReport& g) {
    Verdict v = combine_verdicts(g.cond_i.verdict, g.cond_ii.verdict);
    v = combine_verdicts(v, g.cond_iii.verdict);
    return combine_verdicts(v, g.cond_iv.verdict);
}

} // namespace

StabilityReport classify(const ProblemInstance& inst, const ResolventTable& r,
                         const KernelTable& k) {
    StabilityReport rep;
    const ConditionReport ci = make_cond_i(inst.nu, r);
    const ConditionReport cii = make_cond_ii(k);

    // Vanishing averages: window widths restricted to the mesh.
    std::vector<double> deltas;
    for (double d : default_delta_set()) {
        const double ratio = d / inst.grid.h();
        if (std::abs(ratio - std::round(ratio)) <= 1e-6 * ratio &&
            d <= inst.grid.T())
            deltas.push_back(d);
    }
    rep.vanishing_average.name = "vanishing averages";
    rep.vanishing_average.cond_i = ci;
    rep.vanishing_average.cond_ii = cii;
    if (deltas.empty()) {
        rep.vanishing_average.cond_iii = {Verdict::INCONCLUSIVE,
                                          "no grid-aligned window width"};
        rep.vanishing_average.cond_iv = rep.vanishing_average.cond_iii;
    } else {
        try {
            rep.va = check_vanishing_average_conditions(inst.f, inst.g,
                                                        inst.grid, deltas);
            std::ostringstream osf;
            for (const auto& [delta, trend] : rep.va->f_per_delta)
                osf << "delta " << num(delta) << ": " << trend_evidence(trend)
                    << " -> " << verdict_name(trend.verdict) << "; ";
            osf << "filter cross-check "
                << verdict_name(rep.va->f_filter.verdict);
            rep.vanishing_average.cond_iii = {rep.va->f_verdict, osf.str()};
            rep.vanishing_average.cond_iv = {
                rep.va->g_verdict,
                "unit-window integral of g^2: " +
                    trend_evidence(rep.va->g_window)};
        } catch (const InsufficientHorizonError& e) {
            rep.vanishing_average.cond_iii = {Verdict::INCONCLUSIVE,
                                              e.what()};
            rep.vanishing_average.cond_iv = rep.vanishing_average.cond_iii;
        }
    }
    rep.vanishing_average.overall = group_overall(rep.vanishing_average);

    // Exponential weights: (iii) is the g moment, (iv) the f boundedness.
    rep.ew = check_exponential_weight_conditions(inst.f, inst.g, inst.grid,
                                                 default_beta_grid());
    rep.exponential_weight.name = "exponential weights";
    rep.exponential_weight.cond_i = ci;
    rep.exponential_weight.cond_ii = cii;
    {
        std::ostringstream osg;
        if (rep.ew.best_g_beta)
            osg << "largest beta with finite weighted g^2 integral "
                << num(*rep.ew.best_g_beta);
        else
            osg << "no tested beta keeps the weighted g^2 integral finite";
        rep.exponential_weight.cond_iii = {rep.ew.g_verdict, osg.str()};
        std::ostringstream osf;
        if (rep.ew.best_f_beta)
            osf << "largest beta with bounded weighted f integral "
                << num(*rep.ew.best_f_beta) << " (bound ";
        else
            osf << "weighted f integral max always near the horizon (last "
                   "bound ";
        double last_bound = 0.0, last_frac = 0.0;
        for (const auto& e : rep.ew.per_beta) {
            if (rep.ew.best_f_beta && e.beta == *rep.ew.best_f_beta) {
                last_bound = e.f_bound;
                last_frac = e.f_argmax_frac;
            }
        }
        if (!rep.ew.best_f_beta && !rep.ew.per_beta.empty()) {
            last_bound = rep.ew.per_beta.back().f_bound;
            last_frac = rep.ew.per_beta.back().f_argmax_frac;
        }
        osf << num(last_bound) << ", attained at " << num(last_frac * 100.0)
            << "% of the horizon)";
        if (!rep.ew.monotone_bound_ok)
            osf << "; bound not monotone across beta: "
                << rep.ew.monotone_note;
        rep.exponential_weight.cond_iv = {rep.ew.f_verdict, osf.str()};
    }
    rep.exponential_weight.overall = combine_verdicts(
        combine_verdicts(ci.verdict, cii.verdict), rep.ew.overall);

    // Square integrability of the filtered drift and of the diffusion.
    rep.si = check_square_integrability_conditions(inst.f, inst.g, inst.grid);
    rep.square_integrable.name = "square integrability";
    rep.square_integrable.cond_i = ci;
    rep.square_integrable.cond_ii = cii;
    {
        const auto fmt_inc = [](const std::array<double, 4>& a) {
            return "[" + num(a[0]) + ", " + num(a[1]) + ", " + num(a[2]) +
                   ", " + num(a[3]) + "]";
        };
        rep.square_integrable.cond_iii = {
            rep.si.f_verdict,
            "quarter increments of int (filtered f)^2: " +
                fmt_inc(rep.si.filtered_f_sq_increments) + ", total " +
                num(rep.si.filtered_f_sq_total)};
        rep.square_integrable.cond_iv = {
            rep.si.g_verdict, "quarter increments of int g^2: " +
                                  fmt_inc(rep.si.g_sq_increments) +
                                  ", total " + num(rep.si.g_sq_total)};
    }
    rep.square_integrable.overall = group_overall(rep.square_integrable);
    return rep;
}

} // namespace msfde
