#pragma once
// Mean square of the perturbed equation: deterministic component x, forcing
// gamma, the Volterra-solved Z and E[Y^2], and the assembled E[X^2], with the
// explicit fast path when the noise delay measure is zero.

#include "msfde/grid.hpp"
#include "msfde/kernels.hpp"
#include "msfde/measures.hpp"
#include "msfde/resolvent.hpp"

namespace msfde {

struct ProblemInstance {
    FiniteSignedMeasure nu;
    FiniteSignedMeasure mu;
    FunctionTable f;    // drift perturbation on [0, T]
    FunctionTable g;    // diffusion perturbation on [0, T]
    FunctionTable psi;  // initial segment on [-tau, 0]
    Grid grid;

    // Validates co-location: f, g on [0, T]; psi on [-tau, 0]; measures
    // aligned to the grid.
    ProblemInstance(FiniteSignedMeasure nu_, FiniteSignedMeasure mu_,
                    FunctionTable f_, FunctionTable g_, FunctionTable psi_,
                    const Grid& grid_);
};

struct MeanSquareSolution {
    FunctionTable EX2;
    FunctionTable EY2;
    FunctionTable Z;
    FunctionTable gamma;
    FunctionTable x;   // x0 + x1
    FunctionTable x0;
    FunctionTable x1;
    bool used_mu_zero_path = false;
};

// The deterministic solution extended backwards by psi on [-tau, 0), so delay
// reads during the diffusion-functional evaluation see the initial segment.
FunctionTable extend_with_history(const FunctionTable& x,
                                  const FunctionTable& psi);

// gamma(t) = (r^2 * (g + G(x_.))^2)(t); psi supplies x's values before 0.
FunctionTable forcing_gamma(const ProblemInstance& inst,
                            const ResolventTable& r, const FunctionTable& x);

// Z(t) = gamma(t) + (G^2 * Z)(t), clamped against quadrature jitter.
FunctionTable solve_Z(const FunctionTable& gamma, const KernelTable& k,
                      const Grid& grid);

// Full orchestration;  EX2 = x^2 + Z.
MeanSquareSolution mean_square(const ProblemInstance& inst);

struct MsConsistencyReport {
    double dev_renewal_route = 0.0;  // max |Z - (gamma + rho * gamma)|
    double dev_y_route = 0.0;        // max |Z - r^2 * EY2|
    double tolerance = 0.0;          // 20 h^2 max|Z|
    bool pass = false;
};

// Three representations of the same function must agree within the scheme's
// quadrature tolerance.
MsConsistencyReport consistency_check(const MeanSquareSolution& sol,
                                      const ResolventTable& r,
                                      const RhoTable& rho);

} // namespace msfde
