#pragma once
// Euler-Maruyama path simulator for the perturbed equation and the
// cross-check of its sampled mean square against the deterministic solver.
// Reproducibility contract: for a fixed (seed, paths, grid, instance) and
// build, results are bit-identical regardless of thread count or execution
// order (counter-based increments, fixed-shape chunk reduction).

#include <cstdint>
#include <vector>

#include "msfde/grid.hpp"
#include "msfde/volterra_ms.hpp"

namespace msfde {

enum class PsiMode {
    deterministic,  // every path starts on the instance's psi
    random,         // psi scaled by one standard-normal amplitude per path
};

struct McConfig {
    std::int64_t paths = 0;   // >= 2 (variance needs two samples)
    std::uint64_t seed = 0;
    PsiMode psi_mode = PsiMode::deterministic;
};

struct McEstimate {
    FunctionTable mean_sq;  // sample mean of X^2 on [0, T]
    FunctionTable std_err;  // sample std of X^2 divided by sqrt(paths)
    std::int64_t paths = 0;
    bool exploded = false;          // some path left [-1e150, 1e150]
    double first_blowup_time = 0.0; // earliest such node time
};

McEstimate simulate(const ProblemInstance& inst, const McConfig& cfg);

struct CompareLine {
    double t_requested = 0.0;
    double t_node = 0.0;       // nearest grid node actually compared
    double mc_mean_sq = 0.0;
    double mc_std_err = 0.0;
    double volterra_EX2 = 0.0;
    double z_raw = 0.0;  // |diff| / std_err
    double z = 0.0;      // |diff| / (std_err + kappa h |EX2|)
};

struct CompareReport {
    std::vector<CompareLine> lines;
    double kappa = 5.0;
    bool pass = false;       // every allowance-adjusted z is <= 4
    bool low_power = false;  // too few paths or error bars dwarf the signal
};

// Z-scores of the sampled mean square against the deterministic EX2 at the
// requested checkpoint times, with a kappa*h*EX2 discretization allowance
// added to the denominator scale.
CompareReport compare(const McEstimate& est, const MeanSquareSolution& sol,
                      const std::vector<double>& checkpoints,
                      double kappa = 5.0);

} // namespace msfde
