#include <array>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "msfde/errors.hpp"
#include "msfde/grid.hpp"
#include "msfde/measures.hpp"
#include "msfde/montecarlo.hpp"
#include "msfde/philox.hpp"
#include "msfde/volterra_ms.hpp"
#include "test_util.hpp"

using namespace msfde;
using namespace msfde_test;

namespace {

ProblemInstance scalar_instance(const Grid& grid, double a, double c,
                                double f_c, double g_c, double psi_c) {
    const auto nu = FiniteSignedMeasure::point(grid.tau(), 0.0, a);
    const auto mu = c == 0.0
                        ? FiniteSignedMeasure::zero(grid.tau())
                        : FiniteSignedMeasure::point(grid.tau(), 0.0, c);
    return ProblemInstance(nu, mu, constant_on_horizon(grid, f_c),
                           constant_on_horizon(grid, g_c),
                           constant_on_delay(grid, psi_c), grid);
}

bool same_bits(const FunctionTable& a, const FunctionTable& b) {
    return a.size() == b.size() &&
           std::memcmp(a.values().data(), b.values().data(),
                       a.size() * sizeof(double)) == 0;
}

} // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("philox4x32-10 reference vectors") {
    using msfde::detail::philox4x32;
    {
        const auto out = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
        const std::array<std::uint32_t, 4> want{0x6627e8d5u, 0xe169c58du,
                                                0xbc57ac4cu, 0x9b00dbd8u};
        CHECK(out == want);
    }
    {
        const auto out = philox4x32(
            {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
            {0xffffffffu, 0xffffffffu});
        const std::array<std::uint32_t, 4> want{0x408f276du, 0x41c83b0eu,
                                                0xa20bc7c6u, 0x6d5451fdu};
        CHECK(out == want);
    }
    {
        const auto out = philox4x32(
            {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
            {0xa4093822u, 0x299f31d0u});
        const std::array<std::uint32_t, 4> want{0xd16cfe09u, 0x94fdccebu,
                                                0x5001e420u, 0x24126ea1u};
        CHECK(out == want);
    }
}

TEST_CASE("normal increments: moments and stream separation") {
    using msfde::detail::philox_normal;
    const std::uint64_t seed = 42;
    const std::size_t n = 200000;
    double sum = 0.0, sum2 = 0.0, sum3 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z =
            philox_normal(seed, i % 1024, static_cast<std::uint32_t>(i / 1024),
                          msfde::detail::kBrownianStream);
        sum += z;
        sum2 += z * z;
        sum3 += z * z * z;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum2 / static_cast<double>(n) - mean * mean;
    CHECK(std::abs(mean) <= 0.01);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(sum3 / static_cast<double>(n)) <= 0.05);
    // Different stream tags decorrelate at identical (path, step).
    CHECK(philox_normal(seed, 7, 9, msfde::detail::kBrownianStream) !=
          philox_normal(seed, 7, 9, msfde::detail::kAmplitudeStream));
    // Different seeds decorrelate.
    CHECK(philox_normal(1, 0, 0, 0) != philox_normal(2, 0, 0, 0));
}

TEST_CASE("zero data stays exactly zero") {
    const Grid grid(0.01, 1.0, 0.1);
    const auto inst = scalar_instance(grid, -1.0, 1.0, 0.0, 0.0, 0.0);
    const auto est = simulate(inst, McConfig{64, 9, PsiMode::deterministic});
    for (double v : est.mean_sq.values()) CHECK(v == 0.0);
    for (double v : est.std_err.values()) CHECK(v == 0.0);
    CHECK_FALSE(est.exploded);
}

TEST_CASE("noise-free instance reproduces the fused Euler recursion") {
    const Grid grid(0.01, 2.0, 0.1);
    const auto inst = scalar_instance(grid, -1.0, 0.0, 0.0, 0.0, 1.0);
    const auto est = simulate(inst, McConfig{4, 123, PsiMode::deterministic});
    double acc = 1.0;
    for (std::int64_t k = 0; k <= grid.n_steps(); ++k) {
        CHECK(est.mean_sq.at(k) == doctest::Approx(acc * acc).epsilon(1e-15));
        CHECK(est.std_err.at(k) == 0.0);  // all paths identical
        acc = std::fma(-acc, grid.h(), acc);
    }
}

TEST_CASE("bit-identical reruns, independent of the thread budget") {
    const Grid grid(0.01, 1.0, 0.1);
    const FiniteSignedMeasure nu(0.1, {Atom{-0.1, -1.0}});
    const FiniteSignedMeasure mu(0.1, {Atom{0.0, 0.5}});
    const ProblemInstance inst(
        nu, mu,
        sample_on_horizon(grid, [](double t) { return 0.2 * std::sin(t); }),
        constant_on_horizon(grid, 0.3), constant_on_delay(grid, 1.0), grid);
    const McConfig cfg{1000, 77, PsiMode::deterministic};

    const auto a = simulate(inst, cfg);
    const auto b = simulate(inst, cfg);
    CHECK(same_bits(a.mean_sq, b.mean_sq));
    CHECK(same_bits(a.std_err, b.std_err));

    setenv("MSFDE_THREADS", "1", 1);
    const auto c1 = simulate(inst, cfg);
    setenv("MSFDE_THREADS", "3", 1);
    const auto c3 = simulate(inst, cfg);
    unsetenv("MSFDE_THREADS");
    CHECK(same_bits(c1.mean_sq, a.mean_sq));
    CHECK(same_bits(c3.mean_sq, a.mean_sq));
    CHECK(same_bits(c1.std_err, a.std_err));
    CHECK(same_bits(c3.std_err, a.std_err));

    // A different seed changes the stream.
    const auto d = simulate(inst, McConfig{1000, 78, PsiMode::deterministic});
    CHECK_FALSE(same_bits(d.mean_sq, a.mean_sq));
}

TEST_CASE("sampled mean square tracks the deterministic solver") {
    const Grid grid(0.01, 2.0, 0.5);
    const auto inst = scalar_instance(grid, -1.0, 1.0, 0.0, 0.0, 1.0);
    const auto sol = mean_square(inst);
    const auto est =
        simulate(inst, McConfig{20000, 2024, PsiMode::deterministic});
    const auto rep = compare(est, sol, {0.5, 1.0, 2.0});
    CHECK(rep.pass);
    CHECK_FALSE(rep.low_power);
    REQUIRE(rep.lines.size() == 3);
    for (const auto& line : rep.lines) {
        CHECK(line.z <= 4.0);
        CHECK(line.t_node == doctest::Approx(line.t_requested));
    }
}

TEST_CASE("random initial amplitude keeps the mean square calibrated") {
    const Grid grid(0.01, 1.0, 0.1);
    const auto inst = scalar_instance(grid, -1.0, 1.0, 0.0, 0.0, 1.0);
    const auto sol = mean_square(inst);
    const auto est = simulate(inst, McConfig{20000, 5150, PsiMode::random});
    const auto rep = compare(est, sol, {0.0, 0.5, 1.0});
    CHECK(rep.pass);
    // At t = 0 the sampled moment is the sample mean of amp^2.
    CHECK(est.mean_sq.at(0) ==
          doctest::Approx(1.0).epsilon(5.0 * est.std_err.at(0) + 0.05));
}

TEST_CASE("a manufactured mismatch is detected") {
    const Grid grid(0.01, 2.0, 0.5);
    const auto inst = scalar_instance(grid, -1.0, 1.0, 0.0, 0.0, 1.0);
    const auto wrong = mean_square(
        scalar_instance(grid, -1.0, 1.0, 0.0, 0.0, 2.0));  // 4x the moment
    const auto est =
        simulate(inst, McConfig{5000, 99, PsiMode::deterministic});
    const auto rep = compare(est, wrong, {0.5, 1.0, 2.0});
    CHECK_FALSE(rep.pass);
}

TEST_CASE("two paths flag low statistical power") {
    const Grid grid(0.01, 1.0, 0.1);
    const auto inst = scalar_instance(grid, -1.0, 1.0, 0.0, 0.0, 1.0);
    const auto sol = mean_square(inst);
    const auto est = simulate(inst, McConfig{2, 7, PsiMode::deterministic});
    const auto rep = compare(est, sol, {0.5, 1.0});
    CHECK(rep.low_power);
}

TEST_CASE("path-count validation") {
    const Grid grid(0.01, 1.0, 0.1);
    const auto inst = scalar_instance(grid, -1.0, 0.0, 0.0, 0.0, 1.0);
    CHECK_THROWS_AS(simulate(inst, McConfig{1, 7, PsiMode::deterministic}),
                    DomainError);
    CHECK_THROWS_AS(simulate(inst, McConfig{0, 7, PsiMode::deterministic}),
                    DomainError);
    CHECK_THROWS_AS(simulate(inst, McConfig{-5, 7, PsiMode::deterministic}),
                    DomainError);
}

TEST_CASE("explosive drift is flagged with its first blow-up time") {
    const Grid grid(0.01, 2.0, 0.1);
    const auto inst = scalar_instance(grid, 1000.0, 0.0, 0.0, 0.0, 1.0);
    const auto est = simulate(inst, McConfig{8, 3, PsiMode::deterministic});
    CHECK(est.exploded);
    CHECK(est.first_blowup_time > 1.0);
    CHECK(est.first_blowup_time <= 2.0);
}

TEST_CASE("comparison refuses mismatched grids") {
    const Grid grid(0.01, 1.0, 0.1);
    const Grid other(0.02, 1.0, 0.1);
    const auto inst = scalar_instance(grid, -1.0, 1.0, 0.0, 0.0, 1.0);
    const auto inst2 = scalar_instance(other, -1.0, 1.0, 0.0, 0.0, 1.0);
    const auto est = simulate(inst, McConfig{16, 7, PsiMode::deterministic});
    const auto sol = mean_square(inst2);
    CHECK_THROWS_AS(compare(est, sol, {0.5}), DomainError);
}

} // TEST_SUITE
