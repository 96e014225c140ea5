#include "msfde/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <thread>
#include <utility>
#include <vector>

#include "msfde/errors.hpp"
#include "msfde/measures.hpp"
#include "msfde/philox.hpp"
#include "msfde/simd.hpp"

namespace msfde {

namespace detail {

double philox_normal(std::uint64_t seed, std::uint64_t path,
                     std::uint32_t step, std::uint32_t stream) {
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32)};
    const std::array<std::uint32_t, 4> ctr = {
        step, static_cast<std::uint32_t>(path),
        static_cast<std::uint32_t>(path >> 32), stream};
    const auto b = philox4x32(ctr, key);
    const std::uint64_t wa =
        (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    const std::uint64_t wb =
        (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
    constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
    const double u1 = static_cast<double>((wa >> 11) + 1) * kInv53;  // (0,1]
    const double u2 = static_cast<double>(wb >> 11) * kInv53;        // [0,1)
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

} // namespace detail

namespace {

constexpr std::size_t kChunk = 256;   // lanes per work unit
constexpr double kBlowup = 1e150;

// The measure's trapezoid action on a time row, collapsed to one weight per
// node offset so the batched update is a short axpy sequence.
std::vector<std::pair<std::int64_t, double>> weight_list(
    const FiniteSignedMeasure& m, const Grid& grid) {
    const detail::IndexedMeasure im(m, grid);
    std::map<std::int64_t, double> acc;
    for (const auto& a : im.atoms) acc[a.offset] += a.weight;
    const double h = grid.h();
    for (const auto& p : im.pieces) {
        acc[p.left] += 0.5 * p.value * h;
        for (std::int64_t o = p.left + 1; o < p.right; ++o)
            acc[o] += p.value * h;
        acc[p.right] += 0.5 * p.value * h;
    }
    return {acc.begin(), acc.end()};
}

std::size_t worker_count(std::size_t n_chunks) {
    std::size_t n = 0;
    if (const char* env = std::getenv("MSFDE_THREADS"); env && *env) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env) n = static_cast<std::size_t>(v);
    }
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(n, n_chunks));
}

struct ChunkMoments {
    std::vector<double> s2;  // sum over lanes of X^2 per node
    std::vector<double> s4;  // sum over lanes of X^4 per node
    bool exploded = false;
    double first_blowup = std::numeric_limits<double>::infinity();
};

struct SimShared {
    const ProblemInstance* inst;
    const McConfig* cfg;
    std::vector<std::pair<std::int64_t, double>> nu_w, mu_w;
};

void run_chunk(const SimShared& sh, std::size_t chunk, ChunkMoments& out) {
    const ProblemInstance& inst = *sh.inst;
    const Grid& grid = inst.grid;
    const double h = grid.h();
    const std::int64_t nd = grid.n_delay();
    const std::int64_t ns = grid.n_steps();
    const std::int64_t p0 =
        static_cast<std::int64_t>(chunk) * static_cast<std::int64_t>(kChunk);
    const std::size_t L = static_cast<std::size_t>(
        std::min<std::int64_t>(static_cast<std::int64_t>(kChunk),
                               sh.cfg->paths - p0));

    // Time-major lane matrix over [-tau, T]; row k holds X(t_k) per lane.
    std::vector<double> X(static_cast<std::size_t>(nd + ns + 1) * L);
    const auto row = [&](std::int64_t k) {
        return X.data() + static_cast<std::size_t>(k + nd) * L;
    };

    std::vector<double> amp(L, 1.0);
    if (sh.cfg->psi_mode == PsiMode::random)
        for (std::size_t l = 0; l < L; ++l)
            amp[l] = detail::philox_normal(
                sh.cfg->seed, static_cast<std::uint64_t>(p0) + l, 0,
                detail::kAmplitudeStream);

    for (std::int64_t k = -nd; k <= 0; ++k) {
        const double pv = inst.psi.at(k);
        double* r = row(k);
        for (std::size_t l = 0; l < L; ++l) r[l] = amp[l] * pv;
    }

    std::vector<double> drift(L), diff(L), db(L);
    const double sqrt_h = std::sqrt(h);
    for (std::int64_t k = 0; k < ns; ++k) {
        std::fill(drift.begin(), drift.end(), inst.f.raw(
            static_cast<std::size_t>(k)));
        for (const auto& [off, w] : sh.nu_w)
            simd::axpy(w, row(k + off), drift.data(), L);
        std::fill(diff.begin(), diff.end(), inst.g.raw(
            static_cast<std::size_t>(k)));
        for (const auto& [off, w] : sh.mu_w)
            simd::axpy(w, row(k + off), diff.data(), L);
        for (std::size_t l = 0; l < L; ++l)
            db[l] = sqrt_h * detail::philox_normal(
                sh.cfg->seed, static_cast<std::uint64_t>(p0) + l,
                static_cast<std::uint32_t>(k), detail::kBrownianStream);
        simd::em_step(row(k), drift.data(), diff.data(), db.data(), h,
                      row(k + 1), L);
        double* rn = row(k + 1);
        for (std::size_t l = 0; l < L; ++l) {
            if (std::abs(rn[l]) > kBlowup) {
                rn[l] = std::copysign(kBlowup, rn[l]);
                out.exploded = true;
                out.first_blowup =
                    std::min(out.first_blowup, grid.time(k + 1));
            }
        }
    }

    // Lane order inside a chunk is fixed, so these partial sums are
    // reproducible regardless of which worker ran the chunk.
    out.s2.assign(static_cast<std::size_t>(ns) + 1, 0.0);
    out.s4.assign(static_cast<std::size_t>(ns) + 1, 0.0);
    for (std::int64_t k = 0; k <= ns; ++k) {
        const double* r = row(k);
        double a2 = 0.0, a4 = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            const double sq = r[l] * r[l];
            a2 += sq;
            a4 += sq * sq;
        }
        out.s2[static_cast<std::size_t>(k)] = a2;
        out.s4[static_cast<std::size_t>(k)] = a4;
    }
}

} // namespace

McEstimate simulate(const ProblemInstance& inst, const McConfig& cfg) {
    if (cfg.paths < 2)
        throw DomainError("simulate: at least two paths are required");
    const Grid& grid = inst.grid;
    if (grid.n_steps() >=
        static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max()))
        throw DomainError("simulate: step count exceeds the counter width");

    SimShared sh;
    sh.inst = &inst;
    sh.cfg = &cfg;
    sh.nu_w = weight_list(inst.nu, grid);
    sh.mu_w = weight_list(inst.mu, grid);

    const std::size_t n_chunks =
        (static_cast<std::size_t>(cfg.paths) + kChunk - 1) / kChunk;
    std::vector<ChunkMoments> parts(n_chunks);
    const std::size_t workers = worker_count(n_chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            run_chunk(sh, c, parts[c]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t c =
                        next.fetch_add(1, std::memory_order_relaxed);
                    if (c >= n_chunks) return;
                    run_chunk(sh, c, parts[c]);
                }
            });
        for (auto& t : pool) t.join();
    }

    // Chunk-ordered reduction: identical totals for any worker schedule.
    const std::size_t n_nodes = static_cast<std::size_t>(grid.n_steps()) + 1;
    std::vector<double> s2(n_nodes, 0.0), s4(n_nodes, 0.0);
    bool exploded = false;
    double first = std::numeric_limits<double>::infinity();
    for (const ChunkMoments& p : parts) {
        for (std::size_t k = 0; k < n_nodes; ++k) {
            s2[k] += p.s2[k];
            s4[k] += p.s4[k];
        }
        if (p.exploded) {
            exploded = true;
            first = std::min(first, p.first_blowup);
        }
    }

    const double n = static_cast<double>(cfg.paths);
    std::vector<double> mean(n_nodes), err(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
        mean[k] = s2[k] / n;
        const double var =
            std::max(0.0, (s4[k] - s2[k] * s2[k] / n) / (n - 1.0));
        err[k] = std::sqrt(var / n);
    }
    return McEstimate{FunctionTable(grid, 0, std::move(mean)),
                      FunctionTable(grid, 0, std::move(err)), cfg.paths,
                      exploded, exploded ? first : 0.0};
}

CompareReport compare(const McEstimate& est, const MeanSquareSolution& sol,
                      const std::vector<double>& checkpoints, double kappa) {
    const Grid& grid = est.mean_sq.grid();
    if (!(sol.EX2.grid() == grid) || sol.EX2.size() != est.mean_sq.size())
        throw DomainError(
            "compare: estimate and solution live on different grids");

    CompareReport rep;
    rep.kappa = kappa;
    rep.pass = true;
    rep.low_power = est.paths < 30;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (double t : checkpoints) {
        std::int64_t k = std::llround(t / grid.h());
        k = std::clamp<std::int64_t>(k, 0, grid.n_steps());
        CompareLine line;
        line.t_requested = t;
        line.t_node = grid.time(k);
        line.mc_mean_sq = est.mean_sq.at(k);
        line.mc_std_err = est.std_err.at(k);
        line.volterra_EX2 = sol.EX2.at(k);
        const double diff = std::abs(line.mc_mean_sq - line.volterra_EX2);
        line.z_raw = line.mc_std_err > 0.0 ? diff / line.mc_std_err
                                           : (diff == 0.0 ? 0.0 : kInf);
        const double denom =
            line.mc_std_err + kappa * grid.h() * std::abs(line.volterra_EX2);
        line.z = denom > 0.0 ? diff / denom : (diff == 0.0 ? 0.0 : kInf);
        if (!(line.z <= 4.0)) rep.pass = false;
        if (line.mc_std_err > std::abs(line.volterra_EX2) &&
            line.mc_std_err > 0.0)
            rep.low_power = true;
        rep.lines.push_back(line);
    }
    return rep;
}

} // namespace msfde
