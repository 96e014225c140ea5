#pragma once
// Shared trapezoid machinery: table convolution, second-kind Volterra
// marching, running integrals, tail fits. Every module discretizes through
// these routines so the O(h^2) constants stay consistent across the three
// representations of the same quantity.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "msfde/grid.hpp"

namespace msfde {

// Trapezoid convolution c(t_k) = integral_0^{t_k} a(t_k - s) b(s) ds for
// tables on [0, T]; returns a table on [0, T] with c(0) = 0.
FunctionTable convolve_tables(const FunctionTable& a, const FunctionTable& b);

// Solve y(t) = F(t) + integral_0^t K(t - s) y(s) ds by trapezoid marching
// with the diagonal term handled implicitly. Throws StepSizeError when
// 1 - (h/2) K(0) <= 0.
FunctionTable solve_volterra_second_kind(const FunctionTable& F,
                                         const FunctionTable& K);

// Running trapezoid integral I(t_k) = integral_0^{t_k} y ds, compensated
// summation; input and output on [0, T].
FunctionTable running_integral(const FunctionTable& y);

// Single trapezoid integral over the whole table domain.
double trapezoid(const FunctionTable& y);

// Least-squares slope of log|y| versus t over node range [lo, hi], skipping
// nodes with |y| below `floor`. Empty when fewer than two usable nodes.
struct LogFit {
    double slope = 0.0;
    std::size_t nodes_used = 0;
};
std::optional<LogFit> fit_log_slope(std::span<const double> values,
                                    double t0, double h, std::size_t lo,
                                    std::size_t hi, double floor = 1e-14);

// Max of |values| over each quarter of [lo, hi].
std::array<double, 4> quarter_maxima(std::span<const double> values,
                                     std::size_t lo, std::size_t hi);

// Bisection root of fn over [lo, hi]; requires a sign change; tolerance on
// the argument. Used for characteristic roots and the critical rate.
double bisect(const std::function<double(double)>& fn, double lo, double hi,
              double x_tol, int max_iter = 200);

// Pointwise helpers (tables must share grid and domain).
FunctionTable table_square(const FunctionTable& a);
FunctionTable table_sum(const FunctionTable& a, const FunctionTable& b);
FunctionTable table_abs(const FunctionTable& a);

} // namespace msfde
