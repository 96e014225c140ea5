#include "msfde/volterra_ms.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "msfde/errors.hpp"
#include "msfde/quadrature.hpp"

namespace msfde {

namespace {

void require_span(const FunctionTable& t, const Grid& grid, std::int64_t lo,
                  std::int64_t hi, const char* name, const char* where) {
    if (!(t.grid() == grid))
        throw DomainError(std::string(where) + ": " + name +
                          " is tabulated on a different grid");
    if (t.start_index() != lo || t.end_index() != hi)
        throw DomainError(std::string(where) + ": " + name +
                          " does not cover the expected node range");
}

// Negative values in a second-moment table are quadrature jitter when tiny
// and a genuine inconsistency otherwise.
FunctionTable clamp_second_moment(FunctionTable y, const char* what) {
    double scale = 0.0;
    for (double v : y.values()) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(1.0, scale);
    for (double& v : y.mutable_values()) {
        if (v < -tol)
            throw ConsistencyError(
                std::string(what) +
                ": second-moment table went negative beyond rounding "
                "tolerance; refine the grid step h");
        if (v < 0.0) v = 0.0;
    }
    return y;
}

// (g(t) + integral x(t + u) mu(du))^2 on [0, T], with x read through its
// psi-extended history.
FunctionTable diffusion_forcing_sq(const ProblemInstance& inst,
                                   const FunctionTable& x) {
    const Grid& grid = inst.grid;
    const FunctionTable x_ext = extend_with_history(x, inst.psi);
    const detail::IndexedMeasure imu(inst.mu, grid);
    std::vector<double> q(static_cast<std::size_t>(grid.n_steps()) + 1);
    for (std::int64_t k = 0; k <= grid.n_steps(); ++k) {
        const double gx = imu.convolve(x_ext, k, grid.h());
        const double s = inst.g.at(k) + gx;
        q[static_cast<std::size_t>(k)] = s * s;
    }
    return FunctionTable(grid, 0, std::move(q));
}

} // namespace

ProblemInstance::ProblemInstance(FiniteSignedMeasure nu_,
                                 FiniteSignedMeasure mu_, FunctionTable f_,
                                 FunctionTable g_, FunctionTable psi_,
                                 const Grid& grid_)
    : nu(std::move(nu_)),
      mu(std::move(mu_)),
      f(std::move(f_)),
      g(std::move(g_)),
      psi(std::move(psi_)),
      grid(grid_) {
    require_grid_aligned(nu, grid);
    require_grid_aligned(mu, grid);
    require_span(f, grid, 0, grid.n_steps(), "drift perturbation f",
                 "ProblemInstance");
    require_span(g, grid, 0, grid.n_steps(), "diffusion perturbation g",
                 "ProblemInstance");
    require_span(psi, grid, -grid.n_delay(), 0, "initial segment psi",
                 "ProblemInstance");
}

FunctionTable extend_with_history(const FunctionTable& x,
                                  const FunctionTable& psi) {
    const Grid& grid = x.grid();
    require_span(x, grid, 0, grid.n_steps(), "solution table x",
                 "extend_with_history");
    require_span(psi, grid, -grid.n_delay(), 0, "initial segment psi",
                 "extend_with_history");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(grid.n_delay() + grid.n_steps()) + 1);
    // psi on [-tau, 0); the node at 0 is owned by x (they coincide when x
    // honours its initial condition).
    for (std::int64_t k = -grid.n_delay(); k < 0; ++k) v.push_back(psi.at(k));
    for (std::int64_t k = 0; k <= grid.n_steps(); ++k) v.push_back(x.at(k));
    return FunctionTable(grid, -grid.n_delay(), std::move(v));
}

FunctionTable forcing_gamma(const ProblemInstance& inst,
                            const ResolventTable& r, const FunctionTable& x) {
    require_span(r.r, inst.grid, 0, inst.grid.n_steps(), "resolvent table",
                 "forcing_gamma");
    const FunctionTable q = diffusion_forcing_sq(inst, x);
    return convolve_tables(table_square(r.r), q);
}

FunctionTable solve_Z(const FunctionTable& gamma, const KernelTable& k,
                      const Grid& grid) {
    require_span(gamma, grid, 0, grid.n_steps(), "forcing gamma", "solve_Z");
    require_span(k.G_sq, grid, 0, grid.n_steps(), "kernel G^2", "solve_Z");
    return clamp_second_moment(solve_volterra_second_kind(gamma, k.G_sq),
                               "solve_Z");
}

MeanSquareSolution mean_square(const ProblemInstance& inst) {
    const Grid& grid = inst.grid;
    const ResolventTable r = solve_resolvent(inst.nu, grid);
    FunctionTable x0 = homogeneous_x0(inst.nu, inst.psi, r, grid);
    FunctionTable x1 = forced_x1(r, inst.f, grid);
    FunctionTable x = table_sum(x0, x1);

    const KernelTable k = diffusion_kernel(inst.mu, r);
    const FunctionTable q = diffusion_forcing_sq(inst, x);
    FunctionTable gamma = convolve_tables(table_square(r.r), q);

    const bool mu_zero = total_variation(inst.mu) == 0.0;
    // With a zero noise delay measure the Volterra kernel vanishes, so Z is
    // gamma itself and E[Y^2] is the plain squared forcing.
    FunctionTable Z = mu_zero ? gamma : solve_Z(gamma, k, grid);
    FunctionTable EY2 =
        mu_zero ? q
                : clamp_second_moment(solve_volterra_second_kind(q, k.G_sq),
                                      "mean_square (E[Y^2] route)");

    FunctionTable EX2 = table_sum(table_square(x), Z);
    return MeanSquareSolution{std::move(EX2), std::move(EY2), std::move(Z),
                              std::move(gamma), std::move(x),  std::move(x0),
                              std::move(x1),   mu_zero};
}

MsConsistencyReport consistency_check(const MeanSquareSolution& sol,
                                      const ResolventTable& r,
                                      const RhoTable& rho) {
    const Grid& grid = sol.Z.grid();
    require_span(r.r, grid, 0, grid.n_steps(), "resolvent table",
                 "consistency_check");
    require_span(rho.rho, grid, 0, grid.n_steps(), "renewal resolvent rho",
                 "consistency_check");

    const FunctionTable via_renewal =
        table_sum(sol.gamma, convolve_tables(rho.rho, sol.gamma));
    const FunctionTable via_y = convolve_tables(table_square(r.r), sol.EY2);

    MsConsistencyReport rep;
    double z_scale = 0.0;
    for (std::size_t i = 0; i < sol.Z.size(); ++i) {
        z_scale = std::max(z_scale, std::abs(sol.Z.raw(i)));
        rep.dev_renewal_route = std::max(
            rep.dev_renewal_route, std::abs(sol.Z.raw(i) - via_renewal.raw(i)));
        rep.dev_y_route =
            std::max(rep.dev_y_route, std::abs(sol.Z.raw(i) - via_y.raw(i)));
    }
    rep.tolerance = 20.0 * grid.h() * grid.h() * z_scale;
    rep.pass = rep.dev_renewal_route <= rep.tolerance &&
               rep.dev_y_route <= rep.tolerance;
    return rep;
}

} // namespace msfde
