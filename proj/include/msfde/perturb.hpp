#pragma once
// Tail-trend checkers for the drift/diffusion perturbation conditions. Limit
// conditions are undecidable from finite data, so every verdict here is a
// trend heuristic over the tabulated horizon with explicit numeric evidence
// and an INCONCLUSIVE middle band.
//
// Three condition groups are evaluated, mirroring the three stability
// criteria the solver reports on:
//   - vanishing averages:    windowed integrals of f and of g^2 tend to 0;
//   - exponential weights:   e^{beta t}-weighted integrals of f stay bounded
//                            and of g^2 stay finite for some beta > 0;
//   - square integrability:  the exponentially filtered f and g are both
//                            square integrable.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msfde/grid.hpp"
#include "msfde/kernels.hpp"
#include "msfde/resolvent.hpp"
#include "msfde/volterra_ms.hpp"

namespace msfde {

enum class Verdict { PASS, FAIL, INCONCLUSIVE };

const char* verdict_name(Verdict v);

// FAIL dominates, then INCONCLUSIVE, then PASS.
Verdict combine_verdicts(Verdict a, Verdict b);

// Windowed integral integral_t^{t+delta} f ds at every node t with
// t + delta <= T; delta must be a positive grid-aligned width <= 1.
FunctionTable sectional_average(const FunctionTable& f, double delta,
                                const Grid& grid);

// u' = -beta u + f with u(0) = 0, marched with the exact per-step
// integrating factor and a trapezoid source term; beta > 0.
FunctionTable exp_filter(const FunctionTable& f, double beta,
                         const Grid& grid);

// Tail diagnosis of one nonnegative statistic: absolute tolerance derived
// from the front-quarter peak, maxima over the four quarters of the domain,
// and the resulting trend verdict.
struct TailTrend {
    double peak_front = 0.0;  // max over nodes with t <= T/4
    double tol_abs = 0.0;     // 1e-3 * peak_front
    std::array<double, 4> quarters{};
    double tail_sup = 0.0;    // = quarters[3]
    Verdict verdict = Verdict::INCONCLUSIVE;
};

struct VanishingAverageEvidence {
    std::vector<std::pair<double, TailTrend>> f_per_delta;
    TailTrend f_filter;  // |exp_filter(f, 1)| trend, filter-lemma cross-check
    TailTrend g_window;  // unit-window integral of g^2
    Verdict f_verdict = Verdict::INCONCLUSIVE;  // across all deltas
    Verdict g_verdict = Verdict::INCONCLUSIVE;
};

struct WeightedBoundEvidence {
    double beta = 0.0;
    double f_bound = 0.0;        // global max of |int_0^t e^{beta s} f ds|
    std::size_t f_argmax = 0;    // node index attaining the max
    double f_argmax_frac = 0.0;  // argmax / last node
    Verdict f_verdict = Verdict::INCONCLUSIVE;
    double g_weighted_integral = 0.0;  // int_0^T e^{2 beta s} g^2 ds
    bool g_divergent = false;          // tail of the weighted integrand grows
    Verdict g_verdict = Verdict::INCONCLUSIVE;
};

struct ExponentialWeightEvidence {
    std::vector<WeightedBoundEvidence> per_beta;
    std::optional<double> best_f_beta;  // largest beta passing the f test
    std::optional<double> best_g_beta;  // largest beta passing the g test
    // If the f bound is B at the largest passing beta, every smaller tested
    // beta must pass with bound at most 2B.
    bool monotone_bound_ok = true;
    std::string monotone_note;
    Verdict f_verdict = Verdict::INCONCLUSIVE;
    Verdict g_verdict = Verdict::INCONCLUSIVE;
    Verdict overall = Verdict::INCONCLUSIVE;  // some beta passes both sides
};

struct SquareIntegrabilityEvidence {
    std::array<double, 4> filtered_f_sq_increments{};  // quarter increments
    std::array<double, 4> g_sq_increments{};
    double filtered_f_sq_total = 0.0;
    double g_sq_total = 0.0;
    Verdict f_verdict = Verdict::INCONCLUSIVE;
    Verdict g_verdict = Verdict::INCONCLUSIVE;
};

std::vector<double> default_delta_set();  // {0.125, 0.25, 0.5, 1.0}
std::vector<double> default_beta_grid();  // {0.0625, ..., 2.0} dyadic

// Windowed-integral trend checks on f and on g^2; errors when the horizon is
// shorter than 8 time units (no usable tail).
VanishingAverageEvidence check_vanishing_average_conditions(
    const FunctionTable& f, const FunctionTable& g, const Grid& grid,
    const std::vector<double>& delta_set);

// Weighted boundedness of f and weighted integrability of g^2 over an
// ascending positive beta grid.
ExponentialWeightEvidence check_exponential_weight_conditions(
    const FunctionTable& f, const FunctionTable& g, const Grid& grid,
    const std::vector<double>& beta_grid);

// Cauchy-tail test on the running integrals of (exp_filter(f,1))^2 and g^2.
SquareIntegrabilityEvidence check_square_integrability_conditions(
    const FunctionTable& f, const FunctionTable& g, const Grid& grid);

struct ConditionReport {
    Verdict verdict = Verdict::INCONCLUSIVE;
    std::string evidence;  // always populated - no bare booleans
};

struct ConditionGroupReport {
    std::string name;
    ConditionReport cond_i;    // resolvent is square integrable (decays)
    ConditionReport cond_ii;   // kernel L2 norm squared below 1
    ConditionReport cond_iii;  // group-specific f or g condition
    ConditionReport cond_iv;   // group-specific g or f condition
    Verdict overall = Verdict::INCONCLUSIVE;
};

struct StabilityReport {
    ConditionGroupReport vanishing_average;
    ConditionGroupReport exponential_weight;
    ConditionGroupReport square_integrable;
    // Raw numbers behind the group verdicts. The vanishing-average evidence
    // is absent when the horizon was too short for that checker.
    std::optional<VanishingAverageEvidence> va;
    ExponentialWeightEvidence ew;
    SquareIntegrabilityEvidence si;
};

// Full classification of one problem instance against the three condition
// groups, using the default delta and beta grids (restricted to grid-aligned
// window widths).
StabilityReport classify(const ProblemInstance& inst, const ResolventTable& r,
                         const KernelTable& k);

} // namespace msfde
