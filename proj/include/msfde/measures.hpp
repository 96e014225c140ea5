#pragma once
// Finite signed Borel measures on [-tau, 0]: point atoms plus a
// piecewise-constant density. Houses the drift and diffusion delay measures
// and their integration/transform/convolution operations.

#include <cstdint>
#include <vector>

#include "msfde/grid.hpp"

namespace msfde {

struct Atom {
    double location;  // in [-tau, 0]
    double weight;
};

// Constant `value` on [left, right) subset of [-tau, 0].
struct DensityPiece {
    double left;
    double right;
    double value;
};

class FiniteSignedMeasure {
public:
    // Validates: atom locations in [-tau, 0]; pieces ordered, disjoint and
    // inside [-tau, 0]; all weights/values finite.
    FiniteSignedMeasure(double tau, std::vector<Atom> atoms,
                        std::vector<DensityPiece> density = {});

    static FiniteSignedMeasure zero(double tau) {
        return FiniteSignedMeasure(tau, {}, {});
    }
    // Single atom of `weight` at `location`.
    static FiniteSignedMeasure point(double tau, double location,
                                     double weight) {
        return FiniteSignedMeasure(tau, {Atom{location, weight}}, {});
    }

    double tau() const { return tau_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<DensityPiece>& density() const { return density_; }

private:
    double tau_;
    std::vector<Atom> atoms_;
    std::vector<DensityPiece> density_;
};

// Sum of |atom weights| plus integral of |density|.
double total_variation(const FiniteSignedMeasure& m);

// Integral of e^{lambda s} against the measure (atoms exact, density pieces
// integrated in closed form).
double measure_transform(const FiniteSignedMeasure& m, double lambda);

// Throws DomainError unless every atom location and density-piece boundary is
// an integer multiple of grid.h() and tau matches the grid's delay window.
void require_grid_aligned(const FiniteSignedMeasure& m, const Grid& grid);

// Integral of f(t + s) against m(ds) over s in [-tau, 0], evaluated at node
// t_index. Atoms read the table directly; density pieces use the trapezoid
// rule on the nodes they span. Values of f below its domain are 0 by the
// table's extension rule; reaching beyond its upper end is a domain error.
double convolve_measure(const FiniteSignedMeasure& m, const FunctionTable& f,
                        std::int64_t t_index);

namespace detail {
// Measure with locations pre-resolved to node offsets (all <= 0); avoids
// re-deriving alignment in marching loops.
struct IndexedMeasure {
    struct IndexedAtom {
        std::int64_t offset;
        double weight;
    };
    struct IndexedPiece {
        std::int64_t left;   // node offsets, left < right <= 0
        std::int64_t right;
        double value;
    };
    std::vector<IndexedAtom> atoms;
    std::vector<IndexedPiece> pieces;

    IndexedMeasure(const FiniteSignedMeasure& m, const Grid& grid);

    // Same contract as convolve_measure, using the precomputed offsets.
    double convolve(const FunctionTable& f, std::int64_t t_index,
                    double h) const;
};
} // namespace detail

} // namespace msfde
