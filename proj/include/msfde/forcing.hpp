#pragma once
// Forcing families for the drift/diffusion perturbations: the analytic
// example families (chirp, spike train, exponential decay) plus constants
// and CSV-tabulated data, realized exactly at grid nodes.

#include <cstdint>
#include <string>
#include <vector>

#include "msfde/grid.hpp"

namespace msfde {

enum class ForcingKind { zero, constant, csv, chirp, spikes, exp_decay };

// One tent on [n, n+1]: zero on [n, n+a] and [n+1-a, n+1], rising linearly
// to `height` at n + 1/2. Its unit-interval integral is (1/2 - a) * height.
struct SpikeEntry {
    std::int64_t n = 0;
    double a = 0.0;  // snapped to the nearest node by the sampler
    double height = 0.0;
};

struct ForcingSpec {
    ForcingKind kind = ForcingKind::zero;
    double c = 0.0;                  // constant
    std::string path;                // csv: two-column (t, value) rows
    double alpha = 0.0;              // chirp e^{alpha t} sin(e^{beta t})
    double beta = 1.0;
    std::vector<SpikeEntry> spikes;
    double scale = 1.0;              // exp_decay: scale * e^{-rate t}
    double rate = 1.0;
};

// Heights h_n = n with widths w_n = 1/n^2 (so a_n = 1/2 - 1/n^2) for
// n = 2..n_max: spike peaks grow without bound while the unit-interval
// integrals n^{-1} vanish.
std::vector<SpikeEntry> standard_spike_schedule(std::int64_t n_max);

// Tabulates the forcing on [0, T]. The chirp refuses (domain error) when its
// trailing oscillation period 2*pi*e^{-beta T} falls below 4h, since node
// sampling aliases past that point. Spike offsets a_n are snapped to the
// nearest node so every kink lands on the mesh.
FunctionTable sample_forcing(const ForcingSpec& spec, const Grid& grid);

namespace detail {
// Two-column (t, value) reader requiring exactly one value at every node of
// [lo_index, hi_index]; `what` tags error messages. Shared by the csv
// forcing kind and csv-sampled initial segments.
FunctionTable load_node_csv(const std::string& path, const Grid& grid,
                            std::int64_t lo_index, std::int64_t hi_index,
                            const char* what);
} // namespace detail

} // namespace msfde
