#include "msfde/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "msfde/config.hpp"
#include "msfde/errors.hpp"
#include "msfde/format.hpp"
#include "msfde/kernels.hpp"
#include "msfde/montecarlo.hpp"
#include "msfde/perturb.hpp"
#include "msfde/quadrature.hpp"
#include "msfde/resolvent.hpp"
#include "msfde/volterra_ms.hpp"

namespace msfde {

namespace {

std::string n6(double x) { return format_double(x, 6); }
std::string n17(double x) { return format_double(x, 17); }

const char* forcing_kind_name(ForcingKind k) {
    switch (k) {
        case ForcingKind::zero: return "zero";
        case ForcingKind::constant: return "constant";
        case ForcingKind::csv: return "csv";
        case ForcingKind::chirp: return "chirp";
        case ForcingKind::spikes: return "spikes";
        case ForcingKind::exp_decay: return "exp_decay";
    }
    return "?";
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw Error("cannot open output file '" + p.string() +
                    "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing output file '" + p.string() + "'");
}

// One CSV table over [0, T]: 17 significant digits, '.' decimal separator,
// '\n' line endings — rerunning a config reproduces every byte.
void write_csv(const std::filesystem::path& p, const std::string& header,
               const std::vector<const FunctionTable*>& cols) {
    const Grid& grid = cols.front()->grid();
    std::string out;
    out.reserve((static_cast<std::size_t>(grid.n_steps()) + 2) *
                (cols.size() + 1) * 26);
    out += header;
    out += '\n';
    for (std::int64_t k = 0; k <= grid.n_steps(); ++k) {
        out += n17(grid.time(k));
        for (const FunctionTable* c : cols) {
            out += ',';
            out += n17(c->at(k));
        }
        out += '\n';
    }
    write_file(p, out);
}

void append_group(std::ostringstream& os, const ConditionGroupReport& g) {
    os << "  [" << g.name << "]\n";
    os << "    (i)   " << verdict_name(g.cond_i.verdict) << " - "
       << g.cond_i.evidence << "\n";
    os << "    (ii)  " << verdict_name(g.cond_ii.verdict) << " - "
       << g.cond_ii.evidence << "\n";
    os << "    (iii) " << verdict_name(g.cond_iii.verdict) << " - "
       << g.cond_iii.evidence << "\n";
    os << "    (iv)  " << verdict_name(g.cond_iv.verdict) << " - "
       << g.cond_iv.evidence << "\n";
    os << "    overall: " << verdict_name(g.overall) << "\n";
}

struct DemoDef {
    const char* name;
    const char* text;
};

// Canonical demo configs; configs/ in the repository ships the same bytes.
const DemoDef kDemos[] = {
    {"scalar", R"cfg(# Scalar noise benchmark: dX = -X dt + X dB, X(0) = 1.
# The mean square has the closed form e^{-t}.

[grid]
h = 0.0025
T = 10
tau = 0.0025

[nu]
atoms = [[0, -1]]

[mu]
atoms = [[0, 1]]

[f]
kind = zero

[g]
kind = zero

[psi]
kind = constant
c = 1

[mc]
paths = 4000
seed = 20240817
psi_mode = deterministic
checkpoints = [0.5, 1, 2, 5]

[analyses]
run = [resolvent, kernel, meansquare, classify, simulate, compare]
)cfg"},
    {"pure-delay", R"cfg(# Pure delay drift: dX = -X(t-1) dt + 0.25 X(t) dB.
# The resolvent follows the method of steps: 1 on [0,1], 2-t on [1,2], ...

[grid]
h = 0.001
T = 12
tau = 1

[nu]
atoms = [[-1, -1]]

[mu]
atoms = [[0, 0.25]]

[f]
kind = zero

[g]
kind = exp_decay
scale = 0.3
rate = 0.5

[psi]
kind = constant
c = 1

[mc]
paths = 2000
seed = 7041776
psi_mode = deterministic
checkpoints = [1, 3, 6, 10]

[analyses]
run = [resolvent, kernel, meansquare, classify, simulate, compare]
)cfg"},
    {"chirp", R"cfg(# Oscillatory drift perturbation f(t) = e^{t/2} sin(e^t):
# signed averages vanish while absolute averages grow.

[grid]
h = 0.000244140625
T = 8
tau = 0.000244140625

[nu]
atoms = [[0, -1]]

[mu]
atoms = [[0, 0.5]]

[f]
kind = chirp
alpha = 0.5
beta = 1

[g]
kind = exp_decay
scale = 1
rate = 1

[psi]
kind = constant
c = 1

[analyses]
run = [resolvent, kernel, classify]
)cfg"},
    {"spikes", R"cfg(# Spike-train drift: tents of height n and area 1/n^2 on [n, n+1] —
# arbitrarily tall spikes whose windowed averages still vanish.

[grid]
h = 0.00390625
T = 16
tau = 0.00390625

[nu]
atoms = [[0, -1]]

[mu]
atoms = [[0, 0.5]]

[f]
kind = spikes
schedule = [[2, 0.25, 2], [3, 0.3888888888888889, 3], [4, 0.4375, 4], [5, 0.46, 5], [6, 0.4722222222222222, 6], [7, 0.4795918367346939, 7], [8, 0.484375, 8], [9, 0.4876543209876543, 9], [10, 0.49, 10], [11, 0.4917355371900826, 11], [12, 0.4930555555555556, 12], [13, 0.4940828402366864, 13], [14, 0.4948979591836735, 14], [15, 0.4955555555555556, 15]]

[g]
kind = exp_decay
scale = 1
rate = 1

[psi]
kind = constant
c = 1

[analyses]
run = [resolvent, kernel, classify]
)cfg"},
    {"constant-g", R"cfg(# Constant diffusion level: dX = -X dt + dB from a zero initial state.
# The mean square saturates at 1/2 instead of vanishing.

[grid]
h = 0.001
T = 10
tau = 0.001

[nu]
atoms = [[0, -1]]

[f]
kind = zero

[g]
kind = constant
c = 1

[psi]
kind = constant
c = 0

[mc]
paths = 3000
seed = 555813
psi_mode = deterministic
checkpoints = [1, 3, 5, 10]

[analyses]
run = [resolvent, kernel, meansquare, classify, simulate, compare]
)cfg"},
};

} // namespace

void run(const std::string& config_path, const std::string& out_dir) {
    const RunConfig cfg = load_config(config_path);
    namespace fs = std::filesystem;
    const fs::path out(out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw Error("cannot create output directory '" + out_dir +
                    "': " + ec.message());

    const Grid& grid = cfg.grid;
    const FunctionTable f = sample_forcing(cfg.f, grid);
    const FunctionTable g = sample_forcing(cfg.g, grid);
    const FunctionTable psi = sample_psi(cfg.psi, grid);
    const ProblemInstance inst(cfg.nu, cfg.mu, f, g, psi, grid);

    const auto want = [&](Analysis a) {
        return std::find(cfg.analyses.begin(), cfg.analyses.end(), a) !=
               cfg.analyses.end();
    };
    const bool w_resolvent = want(Analysis::resolvent);
    const bool w_kernel = want(Analysis::kernel);
    const bool w_meansquare = want(Analysis::meansquare);
    const bool w_classify = want(Analysis::classify);
    const bool w_simulate = want(Analysis::simulate);
    const bool w_compare = want(Analysis::compare);

    // Dependency closure: compare needs both solvers; every kernel- or
    // mean-square-level quantity needs the resolvent underneath.
    const bool need_sol = w_meansquare || w_compare;
    const bool need_est = w_simulate || w_compare;
    const bool need_kernel = w_kernel || w_classify || need_sol;
    const bool need_resolvent = w_resolvent || need_kernel;

    std::optional<ResolventTable> r;
    if (need_resolvent) r.emplace(solve_resolvent(cfg.nu, grid));
    std::optional<KernelTable> k;
    if (need_kernel) k.emplace(diffusion_kernel(cfg.mu, *r));
    std::optional<RhoTable> rho;
    if (w_kernel || need_sol) rho.emplace(renewal_rho(*k, grid));
    std::optional<MeanSquareSolution> sol;
    std::optional<MsConsistencyReport> cons;
    if (need_sol) {
        sol.emplace(mean_square(inst));
        cons.emplace(consistency_check(*sol, *r, *rho));
    }
    std::optional<StabilityReport> cls;
    if (w_classify) cls.emplace(classify(inst, *r, *k));
    std::optional<McEstimate> est;
    if (need_est) est.emplace(simulate(inst, cfg.mc));
    std::optional<CompareReport> cmp;
    if (w_compare) cmp.emplace(compare(*est, *sol, cfg.checkpoints));

    if (w_resolvent) write_csv(out / "resolvent.csv", "t,r", {&r->r});
    if (w_kernel)
        write_csv(out / "kernel.csv", "t,G,G_sq", {&k->G, &k->G_sq});
    if (w_meansquare)
        write_csv(out / "meansquare.csv", "t,x,EX2,EY2,Z,gamma",
                  {&sol->x, &sol->EX2, &sol->EY2, &sol->Z, &sol->gamma});
    if (w_simulate)
        write_csv(out / "mc.csv", "t,mc_mean_sq,mc_std_err",
                  {&est->mean_sq, &est->std_err});

    std::ostringstream os;
    os << "msfde analysis report\n";
    os << "=====================\n\n";
    os << "instance\n";
    os << "  grid: h = " << n6(grid.h()) << ", T = " << n6(grid.T())
       << ", tau = " << n6(grid.tau()) << "\n";
    os << "  nu: " << cfg.nu.atoms().size() << " atom(s), "
       << cfg.nu.density().size() << " density piece(s), total variation "
       << n6(total_variation(cfg.nu)) << "\n";
    os << "  mu: " << cfg.mu.atoms().size() << " atom(s), "
       << cfg.mu.density().size() << " density piece(s), total variation "
       << n6(total_variation(cfg.mu)) << "\n";
    os << "  f: kind = " << forcing_kind_name(cfg.f.kind) << "\n";
    os << "  g: kind = " << forcing_kind_name(cfg.g.kind) << "\n";
    os << "  analyses:";
    for (Analysis a : cfg.analyses) os << " " << analysis_name(a);
    os << "\n\n";

    if (w_resolvent) {
        os << "resolvent\n";
        os << "  r(T) = " << n6(r->r.at(grid.n_steps())) << "\n";
        if (r->fitted_decay_rate)
            os << "  fitted decay rate = " << n6(*r->fitted_decay_rate)
               << " over t in ["
               << n6(grid.time(static_cast<std::int64_t>(r->fit_window_lo)))
               << ", "
               << n6(grid.time(static_cast<std::int64_t>(r->fit_window_hi)))
               << "]\n";
        else
            os << "  fitted decay rate unavailable (resolvent below the "
                  "numeric floor on the fit window)\n";
        const CharacteristicReport cr = estimate_v0(cfg.nu, *r, -64.0, 64.0);
        os << "  rightmost real characteristic root: "
           << (cr.real_root ? n6(*cr.real_root) : std::string("none found"))
           << "\n";
        os << "  stability verdict: "
           << (cr.verdict_stable ? "stable" : "not stable") << " (method "
           << cr.method << ")\n\n";
    }

    if (w_kernel) {
        os << "kernel\n";
        os << "  G(0) = " << n6(k->G.at(0)) << ", G(T) = "
           << n6(k->G.at(grid.n_steps())) << "\n";
        os << "  L2 norm squared = " << n6(k->l2_norm_sq) << " (truncated "
           << n6(k->l2_norm_sq_truncated) << " + tail "
           << n6(k->l2_tail_estimate) << ")\n";
        if (k->tail_divergent)
            os << "  kernel tail appears nondecaying; tail estimate not "
                  "applied\n";
        try {
            os << "  critical exponential rate = " << n6(critical_rate(*k))
               << "\n";
        } catch (const PreconditionError& e) {
            os << "  critical exponential rate unavailable: " << e.what()
               << "\n";
        }
        os << "  renewal mass (truncated L1 of rho) = "
           << n6(rho->l1_norm_truncated);
        if (!k->tail_divergent && k->l2_norm_sq < 1.0)
            os << "; transform identity value = "
               << n6(k->l2_norm_sq / (1.0 - k->l2_norm_sq));
        os << "\n";
        if (rho->clamp_warning)
            os << "  warning: rho dipped below -1e-12 before clamping\n";
        os << "\n";
    }

    if (w_meansquare) {
        os << "mean square\n";
        os << "  route: "
           << (sol->used_mu_zero_path ? "explicit (mu = 0)"
                                      : "volterra second kind")
           << "\n";
        os << "  x(T) = " << n6(sol->x.at(grid.n_steps())) << ", EX2(T) = "
           << n6(sol->EX2.at(grid.n_steps())) << "\n";
        os << "  consistency: renewal-route dev = "
           << n6(cons->dev_renewal_route) << ", moment-route dev = "
           << n6(cons->dev_y_route) << ", tol = " << n6(cons->tolerance)
           << " -> " << (cons->pass ? "PASS" : "FAIL") << "\n\n";
    }

    if (w_classify) {
        os << "classification\n";
        append_group(os, cls->vanishing_average);
        append_group(os, cls->exponential_weight);
        append_group(os, cls->square_integrable);
        // Side-by-side contrast: the same windowed-average trend check
        // applied to |f|. Oscillating drifts can pass on f itself while
        // failing here.
        try {
            const auto abs_ev = check_vanishing_average_conditions(
                table_abs(f), g, grid, default_delta_set());
            os << "  absolute-value drift averages: "
               << verdict_name(abs_ev.f_verdict);
            if (!abs_ev.f_per_delta.empty()) {
                const auto& [d, trend] = abs_ev.f_per_delta.back();
                os << " (delta " << n6(d) << ": tail sup "
                   << n6(trend.tail_sup) << " vs tol " << n6(trend.tol_abs)
                   << ")";
            }
            os << "\n";
        } catch (const Error&) {
            // Horizon or alignment refusals: skip the contrast line.
        }
        os << "\n";
    }

    if (w_simulate) {
        os << "monte carlo\n";
        os << "  paths = " << cfg.mc.paths << ", seed = " << cfg.mc.seed
           << ", psi mode = "
           << (cfg.mc.psi_mode == PsiMode::random ? "random"
                                                  : "deterministic")
           << "\n";
        if (est->exploded)
            os << "  explosion: first path leaves [-1e150, 1e150] at t = "
               << n6(est->first_blowup_time) << "\n";
        else
            os << "  explosion: none\n";
        os << "\n";
    }

    if (w_compare) {
        os << "comparison (allowance kappa = " << n6(cmp->kappa) << ")\n";
        for (const CompareLine& line : cmp->lines) {
            os << "  t = " << n6(line.t_requested) << " (at node t = "
               << n6(line.t_node) << "): mc = " << n6(line.mc_mean_sq)
               << ", std_err = " << n6(line.mc_std_err)
               << ", deterministic = " << n6(line.volterra_EX2)
               << ", z = " << n6(line.z) << "\n";
        }
        os << "  overall: " << (cmp->pass ? "PASS" : "FAIL")
           << " (low power: " << (cmp->low_power ? "yes" : "no") << ")\n\n";
    }

    write_file(out / "report.txt", os.str());
}

std::vector<std::string> demo_names() {
    std::vector<std::string> out;
    for (const DemoDef& d : kDemos) out.emplace_back(d.name);
    return out;
}

std::string demo_config_text(const std::string& name) {
    for (const DemoDef& d : kDemos)
        if (name == d.name) return d.text;
    std::string valid;
    for (const DemoDef& d : kDemos) {
        if (!valid.empty()) valid += ", ";
        valid += d.name;
    }
    throw ConfigError("unknown demo '" + name + "'; valid names: " + valid);
}

void demo(const std::string& name, const std::string& out_dir) {
    const std::string text = demo_config_text(name);
    namespace fs = std::filesystem;
    const fs::path out(out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw Error("cannot create output directory '" + out_dir +
                    "': " + ec.message());
    const fs::path cfg_path = out / "config.cfg";
    write_file(cfg_path, text);
    run(cfg_path.string(), out_dir);
}

} // namespace msfde
