#include "msfde/forcing.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "msfde/errors.hpp"
#include "msfde/format.hpp"

namespace msfde {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Accepts "t,v" or "t v"; returns false when the line does not hold exactly
// two numeric columns.
bool parse_two_columns(const std::string& line, double& t, double& v) {
    std::string s = line;
    for (char& c : s)
        if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream iss(s);
    std::string rest;
    return (iss >> t >> v) && !(iss >> rest);
}

FunctionTable sample_chirp(double alpha, double beta, const Grid& grid) {
    if (kTwoPi * std::exp(-beta * grid.T()) < 4.0 * grid.h())
        throw DomainError(
            "chirp forcing: trailing oscillation period is below four grid "
            "steps; refine h or shorten the horizon");
    return sample_on_horizon(grid, [&](double t) {
        return std::exp(alpha * t) * std::sin(std::exp(beta * t));
    });
}

FunctionTable sample_spikes(const std::vector<SpikeEntry>& entries,
                            const Grid& grid) {
    const double h = grid.h();
    if (h >= 0.25)
        throw DomainError(
            "spike forcing: grid step too coarse to resolve a tent inside a "
            "unit interval");
    struct Tent {
        double a;
        double height;
    };
    std::map<std::int64_t, Tent> tents;
    for (const SpikeEntry& e : entries) {
        if (e.n < 0)
            throw DomainError("spike forcing: interval index n must be >= 0");
        if (!(e.a > 0.0) || !(e.a < 0.5))
            throw DomainError(
                "spike forcing: offset a must lie strictly inside (0, 1/2)");
        if (!std::isfinite(e.height))
            throw DomainError("spike forcing: height must be finite");
        // Snap the kink to the mesh, keeping it strictly inside (0, 1/2).
        double a = h * std::round(e.a / h);
        a = std::min(std::max(a, h), 0.5 - h);
        if (!tents.emplace(e.n, Tent{a, e.height}).second)
            throw DomainError(
                "spike forcing: duplicate entry for one unit interval");
    }
    return sample_on_horizon(grid, [&](double t) {
        const double nf = std::floor(t);
        const auto it = tents.find(static_cast<std::int64_t>(nf));
        if (it == tents.end()) return 0.0;
        const double s = t - nf;
        const double a = it->second.a;
        if (s <= a || s >= 1.0 - a) return 0.0;
        const double slope_span = 0.5 - a;
        if (s <= 0.5) return it->second.height * (s - a) / slope_span;
        return it->second.height * ((1.0 - a) - s) / slope_span;
    });
}

} // namespace

namespace detail {

FunctionTable load_node_csv(const std::string& path, const Grid& grid,
                            std::int64_t lo_index, std::int64_t hi_index,
                            const char* what) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(std::string(what) + ": cannot open '" + path + "'");
    const std::size_t n = static_cast<std::size_t>(hi_index - lo_index) + 1;
    std::vector<double> vals(n, 0.0);
    std::vector<char> seen(n, 0);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        double t = 0.0, v = 0.0;
        if (!parse_two_columns(line, t, v)) {
            if (line_no == 1) continue;  // header row
            throw ConfigError(std::string(what) + ": line " +
                              std::to_string(line_no) +
                              ": expected two numeric columns");
        }
        std::int64_t k = 0;
        try {
            k = aligned_index(t, grid.h(), what);
        } catch (const DomainError&) {
            throw ConfigError(std::string(what) + ": line " +
                              std::to_string(line_no) +
                              ": t is not a grid node");
        }
        if (k < lo_index || k > hi_index)
            throw ConfigError(std::string(what) + ": line " +
                              std::to_string(line_no) +
                              ": t is outside the required node range");
        const std::size_t i = static_cast<std::size_t>(k - lo_index);
        if (seen[i])
            throw ConfigError(std::string(what) + ": line " +
                              std::to_string(line_no) +
                              ": duplicate value for one grid node");
        seen[i] = 1;
        vals[i] = v;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i])
            throw ConfigError(
                std::string(what) + ": no value for the grid node at t = " +
                format_double(
                    grid.time(lo_index + static_cast<std::int64_t>(i)), 17));
    return FunctionTable(grid, lo_index, std::move(vals));
}

} // namespace detail

std::vector<SpikeEntry> standard_spike_schedule(std::int64_t n_max) {
    std::vector<SpikeEntry> out;
    for (std::int64_t n = 2; n <= n_max; ++n) {
        const double nd = static_cast<double>(n);
        out.push_back(SpikeEntry{n, 0.5 - 1.0 / (nd * nd), nd});
    }
    return out;
}

FunctionTable sample_forcing(const ForcingSpec& spec, const Grid& grid) {
    switch (spec.kind) {
        case ForcingKind::zero:
            return sample_on_horizon(grid, [](double) { return 0.0; });
        case ForcingKind::constant:
            return sample_on_horizon(grid, [&](double) { return spec.c; });
        case ForcingKind::csv:
            return detail::load_node_csv(spec.path, grid, 0, grid.n_steps(),
                                         "forcing csv");
        case ForcingKind::chirp:
            return sample_chirp(spec.alpha, spec.beta, grid);
        case ForcingKind::spikes:
            return sample_spikes(spec.spikes, grid);
        case ForcingKind::exp_decay:
            return sample_on_horizon(grid, [&](double t) {
                return spec.scale * std::exp(-spec.rate * t);
            });
    }
    throw DomainError("forcing: unknown kind");
}

} // namespace msfde
