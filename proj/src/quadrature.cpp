#include "msfde/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "msfde/simd.hpp"

namespace msfde {

namespace {

void require_horizon_table(const FunctionTable& t, const char* what) {
    if (t.start_index() != 0 || t.end_index() != t.grid().n_steps())
        throw DomainError(std::string(what) + " must be tabulated on [0, T]");
}

// Reversed copy: rev[i] = a[n - i], so that
//   sum_{j=0..k} a[k-j] b[j] = dot(&rev[n-k], b, k+1).
std::vector<double> reversed(std::span<const double> a) {
    std::vector<double> rev(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        rev[i] = a[a.size() - 1 - i];
    return rev;
}

} // namespace

FunctionTable convolve_tables(const FunctionTable& a, const FunctionTable& b) {
    require_horizon_table(a, "convolution operand");
    require_horizon_table(b, "convolution operand");
    if (!(a.grid() == b.grid()))
        throw DomainError("convolution operands must share one grid");
    const std::span<const double> av = a.values();
    const std::span<const double> bv = b.values();
    const std::size_t n = av.size();  // n_steps + 1
    const double h = a.grid().h();
    const std::vector<double> arev = reversed(av);

    std::vector<double> c(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double full = simd::dot(arev.data() + (n - 1 - k), bv.data(), k + 1);
        c[k] = h * (full - 0.5 * (av[k] * bv[0] + av[0] * bv[k]));
    }
    return FunctionTable(a.grid(), 0, std::move(c));
}

FunctionTable solve_volterra_second_kind(const FunctionTable& F,
                                         const FunctionTable& K) {
    require_horizon_table(F, "Volterra forcing");
    require_horizon_table(K, "Volterra kernel");
    if (!(F.grid() == K.grid()))
        throw DomainError("Volterra forcing and kernel must share one grid");
    const std::span<const double> Fv = F.values();
    const std::span<const double> Kv = K.values();
    const std::size_t n = Fv.size();
    const double h = F.grid().h();

    const double diag = 1.0 - 0.5 * h * Kv[0];
    if (diag <= 1e-12)
        throw StepSizeError(
            "Volterra march: implicit step 1 - (h/2)K(0) is not positive; "
            "reduce the grid step h");

    const std::vector<double> krev = reversed(Kv);
    std::vector<double> y(n, 0.0);
    y[0] = Fv[0];
    for (std::size_t k = 1; k < n; ++k) {
        // h * [ K_k y_0 / 2 + sum_{j=1..k-1} K_{k-j} y_j ] explicit part.
        double inner = 0.0;
        if (k >= 2)
            inner = simd::dot(krev.data() + (n - k), y.data() + 1, k - 1);
        const double rhs = Fv[k] + h * (0.5 * Kv[k] * y[0] + inner);
        y[k] = rhs / diag;
    }
    return FunctionTable(F.grid(), 0, std::move(y));
}

FunctionTable running_integral(const FunctionTable& y) {
    require_horizon_table(y, "running integral input");
    const std::span<const double> v = y.values();
    const double h = y.grid().h();
    std::vector<double> out(v.size(), 0.0);
    double sum = 0.0, comp = 0.0;  // Kahan
    for (std::size_t k = 1; k < v.size(); ++k) {
        const double term = 0.5 * h * (v[k - 1] + v[k]) - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
        out[k] = sum;
    }
    return FunctionTable(y.grid(), 0, std::move(out));
}

double trapezoid(const FunctionTable& y) {
    const std::span<const double> v = y.values();
    if (v.size() < 2) return 0.0;
    double sum = 0.0, comp = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        const double term = 0.5 * (v[k - 1] + v[k]) - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return y.grid().h() * sum;
}

std::optional<LogFit> fit_log_slope(std::span<const double> values, double t0,
                                    double h, std::size_t lo, std::size_t hi,
                                    double floor) {
    hi = std::min(hi, values.size() - 1);
    double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t k = lo; k <= hi; ++k) {
        const double a = std::abs(values[k]);
        if (a < floor) continue;
        const double t = t0 + static_cast<double>(k) * h;
        const double y = std::log(a);
        n += 1; st += t; sy += y; stt += t * t; sty += t * y;
    }
    if (n < 2) return std::nullopt;
    const double denom = n * stt - st * st;
    if (denom == 0.0) return std::nullopt;
    return LogFit{(n * sty - st * sy) / denom, static_cast<std::size_t>(n)};
}

std::array<double, 4> quarter_maxima(std::span<const double> values,
                                     std::size_t lo, std::size_t hi) {
    hi = std::min(hi, values.size() - 1);
    std::array<double, 4> q{0, 0, 0, 0};
    if (hi < lo) return q;
    const std::size_t len = hi - lo + 1;
    for (int i = 0; i < 4; ++i) {
        const std::size_t a = lo + (len * static_cast<std::size_t>(i)) / 4;
        const std::size_t b =
            lo + (len * static_cast<std::size_t>(i + 1)) / 4;
        for (std::size_t k = a; k < std::max(b, a + 1) && k <= hi; ++k)
            q[static_cast<std::size_t>(i)] =
                std::max(q[static_cast<std::size_t>(i)], std::abs(values[k]));
    }
    return q;
}

double bisect(const std::function<double(double)>& fn, double lo, double hi,
              double x_tol, int max_iter) {
    double flo = fn(lo);
    double fhi = fn(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0) == (fhi < 0))
        throw DomainError("bisection: no sign change over the bracket");
    for (int i = 0; i < max_iter && (hi - lo) > x_tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {
void require_same_shape(const FunctionTable& a, const FunctionTable& b) {
    if (!(a.grid() == b.grid()) || a.start_index() != b.start_index() ||
        a.size() != b.size())
        throw DomainError("tables must share grid and domain");
}
} // namespace

FunctionTable table_square(const FunctionTable& a) {
    std::vector<double> v(a.values().begin(), a.values().end());
    for (double& x : v) x *= x;
    return FunctionTable(a.grid(), a.start_index(), std::move(v));
}

FunctionTable table_sum(const FunctionTable& a, const FunctionTable& b) {
    require_same_shape(a, b);
    std::vector<double> v(a.values().begin(), a.values().end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += b.values()[i];
    return FunctionTable(a.grid(), a.start_index(), std::move(v));
}

FunctionTable table_abs(const FunctionTable& a) {
    std::vector<double> v(a.values().begin(), a.values().end());
    for (double& x : v) x = std::abs(x);
    return FunctionTable(a.grid(), a.start_index(), std::move(v));
}

} // namespace msfde
