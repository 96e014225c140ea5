#include <cmath>
#include <vector>

#include "doctest.h"
#include "msfde/errors.hpp"
#include "msfde/grid.hpp"
#include "msfde/measures.hpp"
#include "msfde/resolvent.hpp"
#include "test_util.hpp"

using namespace msfde;
using namespace msfde_test;

TEST_SUITE("resolvent") {

TEST_CASE("zero measure: r is identically 1") {
    const Grid grid(0.01, 5.0, 0.5);
    const auto res = solve_resolvent(FiniteSignedMeasure::zero(0.5), grid);
    CHECK(max_err(res.r, [](double) { return 1.0; }) <= 1e-12);
}

TEST_CASE("instantaneous drift -1: r = e^{-t} at second order") {
    const Grid grid(0.01, 5.0, 0.5);
    const auto nu = FiniteSignedMeasure::point(0.5, 0.0, -1.0);
    const auto res = solve_resolvent(nu, grid);
    CHECK(res.r.at(0) == 1.0);
    const double err = max_err(res.r, [](double t) { return std::exp(-t); });
    CHECK(err <= 5e-5);

    const Grid half(0.005, 5.0, 0.5);
    const double err_half = max_err(solve_resolvent(nu, half).r,
                                    [](double t) { return std::exp(-t); });
    CHECK(err / err_half == doctest::Approx(4.0).epsilon(0.2));

    REQUIRE(res.fitted_decay_rate.has_value());
    CHECK(*res.fitted_decay_rate == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("pure delay: method-of-steps segments") {
    const Grid grid(0.001, 3.0, 1.0);
    const auto nu = FiniteSignedMeasure::point(1.0, -1.0, -1.0);
    const auto res = solve_resolvent(nu, grid);
    const auto exact = [](double t) {
        if (t <= 1.0) return 1.0;
        if (t <= 2.0) return 2.0 - t;
        return t * t / 2.0 - 3.0 * t + 4.0;
    };
    CHECK(max_err(res.r, exact) <= 5e-6);
    CHECK(res.r.at(1000) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.r.at(2000) == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(res.r.at(3000) == doctest::Approx(-0.5).epsilon(1e-5));
}

TEST_CASE("characteristic function values") {
    const auto nu = FiniteSignedMeasure::point(0.5, 0.0, -1.0);
    CHECK(characteristic_h(nu, 0.0) == doctest::Approx(1.0));
    CHECK(characteristic_h(nu, -1.0) == doctest::Approx(0.0));
    const auto lagged = FiniteSignedMeasure::point(1.0, -1.0, -1.0);
    // lambda + e^{-lambda} at lambda = 0 is 1.
    CHECK(characteristic_h(lagged, 0.0) == doctest::Approx(1.0));
    CHECK(characteristic_h(lagged, 2.0) ==
          doctest::Approx(2.0 + std::exp(-2.0)));
}

TEST_CASE("root and verdict for instantaneous drift") {
    const Grid grid(0.01, 10.0, 0.5);
    {
        const auto nu = FiniteSignedMeasure::point(0.5, 0.0, -1.0);
        const auto rep = estimate_v0(nu, solve_resolvent(nu, grid), -64, 64);
        REQUIRE(rep.real_root.has_value());
        CHECK(*rep.real_root == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(rep.verdict_stable);
    }
    {
        const auto nu = FiniteSignedMeasure::point(0.5, 0.0, -2.0);
        const auto rep = estimate_v0(nu, solve_resolvent(nu, grid), -64, 64);
        REQUIRE(rep.real_root.has_value());
        CHECK(*rep.real_root == doctest::Approx(-2.0).epsilon(1e-6));
        CHECK(rep.verdict_stable);
        CHECK(rep.decay_fit == doctest::Approx(-2.0).epsilon(1e-2));
    }
    {
        // Unstable: positive instantaneous weight.
        const auto nu = FiniteSignedMeasure::point(0.5, 0.0, 1.0);
        const auto rep = estimate_v0(nu, solve_resolvent(nu, grid), -64, 64);
        REQUIRE(rep.real_root.has_value());
        CHECK(*rep.real_root == doctest::Approx(1.0).epsilon(1e-6));
        CHECK_FALSE(rep.verdict_stable);
    }
}

TEST_CASE("pure delay: oscillatory decay rate near -0.3181, no real root") {
    const Grid grid(0.01, 40.0, 1.0);
    const auto nu = FiniteSignedMeasure::point(1.0, -1.0, -1.0);
    const auto res = solve_resolvent(nu, grid);
    const auto rep = estimate_v0(nu, res, -64, 64);
    CHECK_FALSE(rep.real_root.has_value());
    CHECK(rep.method == "decay-fit");
    CHECK(rep.verdict_stable);
    // Rightmost characteristic pair: lambda ~ -0.31813 +- 1.33724 i.
    CHECK(rep.decay_fit == doctest::Approx(-0.31813).epsilon(0.15));
}

TEST_CASE("homogeneous component: instantaneous drift reduces to r") {
    const Grid grid(0.01, 5.0, 0.5);
    const auto nu = FiniteSignedMeasure::point(0.5, 0.0, -1.0);
    const auto res = solve_resolvent(nu, grid);
    const auto x0 = homogeneous_x0(nu, constant_on_delay(grid, 1.0), res, grid);
    CHECK(max_err(x0, [](double t) { return std::exp(-t); }) <= 5e-5);
}

TEST_CASE("homogeneous component: pure delay with constant history") {
    const Grid grid(0.002, 2.0, 1.0);
    const auto nu = FiniteSignedMeasure::point(1.0, -1.0, -1.0);
    const auto res = solve_resolvent(nu, grid);
    const auto x0 = homogeneous_x0(nu, constant_on_delay(grid, 1.0), res, grid);
    const auto exact = [](double t) {
        if (t <= 1.0) return 1.0 - t;
        return t * t / 2.0 - 2.0 * t + 1.5;
    };
    CHECK(max_err(x0, exact) <= 1e-4);
    CHECK(x0.at(250) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(x0.at(500) == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(x0.at(1000) == doctest::Approx(-0.5).epsilon(1e-4));
}

TEST_CASE("homogeneous component: exponential eigen-solution") {
    // With nu = w delta_{-1}, w = lambda e^{lambda}, psi = e^{lambda s}:
    // x0(t) = e^{lambda t} exactly.
    const double lambda = -0.5;
    const double w = lambda * std::exp(lambda);
    const Grid grid(0.005, 4.0, 1.0);
    const auto nu = FiniteSignedMeasure::point(1.0, -1.0, w);
    const auto res = solve_resolvent(nu, grid);
    const auto psi = sample_on_delay(
        grid, [&](double s) { return std::exp(lambda * s); });
    const auto x0 = homogeneous_x0(nu, psi, res, grid);
    CHECK(max_err(x0, [&](double t) { return std::exp(lambda * t); }) <= 1e-4);
}

TEST_CASE("homogeneous component is linear in the initial segment") {
    const Grid grid(0.01, 3.0, 0.5);
    const FiniteSignedMeasure nu(
        0.5, {Atom{0.0, -0.5}, Atom{-0.5, -0.4}},
        {DensityPiece{-0.5, 0.0, -0.2}});
    const auto res = solve_resolvent(nu, grid);
    const auto p1 = sample_on_delay(grid, [](double s) { return 1.0 + s; });
    const auto p2 =
        sample_on_delay(grid, [](double s) { return std::cos(4.0 * s); });
    auto sum = sample_on_delay(grid, [](double) { return 0.0; });
    for (std::size_t i = 0; i < sum.size(); ++i)
        sum.mutable_values()[i] = p1.raw(i) + 2.0 * p2.raw(i);
    const auto a = homogeneous_x0(nu, p1, res, grid);
    const auto b = homogeneous_x0(nu, p2, res, grid);
    const auto c = homogeneous_x0(nu, sum, res, grid);
    double dev = 0.0;
    for (std::int64_t k = 0; k <= grid.n_steps(); ++k)
        dev = std::max(dev, std::abs(c.at(k) - a.at(k) - 2.0 * b.at(k)));
    CHECK(dev <= 1e-10);
}

TEST_CASE("forced component: no drift means plain integration") {
    const Grid grid(0.01, 5.0, 0.5);
    const auto res = solve_resolvent(FiniteSignedMeasure::zero(0.5), grid);
    const auto f = sample_on_horizon(grid, [](double t) { return std::cos(t); });
    const auto x1 = forced_x1(res, f, grid);
    CHECK(max_err(x1, [](double t) { return std::sin(t); }) <= 1e-4);
}

TEST_CASE("forced component: relaxation toward a constant source") {
    const Grid grid(0.01, 5.0, 0.5);
    const auto nu = FiniteSignedMeasure::point(0.5, 0.0, -1.0);
    const auto res = solve_resolvent(nu, grid);
    const auto x1 = forced_x1(res, constant_on_horizon(grid, 1.0), grid);
    CHECK(max_err(x1, [](double t) { return 1.0 - std::exp(-t); }) <= 1e-4);
}

TEST_CASE("density drift: step halving converges at second order") {
    const FiniteSignedMeasure nu(1.0, {}, {DensityPiece{-1.0, 0.0, -1.0}});
    const Grid g1(0.02, 4.0, 1.0);
    const Grid g2(0.01, 4.0, 1.0);
    const Grid g3(0.005, 4.0, 1.0);
    const auto r1 = solve_resolvent(nu, g1).r;
    const auto r2 = solve_resolvent(nu, g2).r;
    const auto r3 = solve_resolvent(nu, g3).r;
    // Richardson-style ratio on the shared endpoint.
    const double d12 = std::abs(r1.at(g1.n_steps()) - r2.at(g2.n_steps()));
    const double d23 = std::abs(r2.at(g2.n_steps()) - r3.at(g3.n_steps()));
    CHECK(d12 / d23 == doctest::Approx(4.0).epsilon(0.25));
}

} // TEST_SUITE
