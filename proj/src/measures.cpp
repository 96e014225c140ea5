#include "msfde/measures.hpp"

#include <algorithm>
#include <cmath>

namespace msfde {

FiniteSignedMeasure::FiniteSignedMeasure(double tau, std::vector<Atom> atoms,
                                         std::vector<DensityPiece> density)
    : tau_(tau), atoms_(std::move(atoms)), density_(std::move(density)) {
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw DomainError("measure: tau must be positive and finite");
    const double slack = 1e-12 * std::max(1.0, tau);
    for (const Atom& a : atoms_) {
        if (!std::isfinite(a.weight))
            throw DomainError("measure: atom weight must be finite");
        if (a.location < -tau - slack || a.location > slack)
            throw DomainError("measure: atom location outside [-tau, 0]");
    }
    std::sort(density_.begin(), density_.end(),
              [](const DensityPiece& p, const DensityPiece& q) {
                  return p.left < q.left;
              });
    double prev_right = -tau - slack;
    for (const DensityPiece& p : density_) {
        if (!std::isfinite(p.value))
            throw DomainError("measure: density value must be finite");
        if (!(p.left < p.right))
            throw DomainError("measure: density piece must have left < right");
        if (p.left < -tau - slack || p.right > slack)
            throw DomainError("measure: density piece outside [-tau, 0]");
        if (p.left < prev_right - slack)
            throw DomainError("measure: density pieces overlap");
        prev_right = p.right;
    }
}

double total_variation(const FiniteSignedMeasure& m) {
    double tv = 0.0;
    for (const Atom& a : m.atoms()) tv += std::abs(a.weight);
    for (const DensityPiece& p : m.density())
        tv += std::abs(p.value) * (p.right - p.left);
    return tv;
}

double measure_transform(const FiniteSignedMeasure& m, double lambda) {
    double s = 0.0;
    for (const Atom& a : m.atoms()) s += a.weight * std::exp(lambda * a.location);
    for (const DensityPiece& p : m.density()) {
        if (lambda == 0.0)
            s += p.value * (p.right - p.left);
        else
            s += p.value *
                 (std::exp(lambda * p.right) - std::exp(lambda * p.left)) /
                 lambda;
    }
    return s;
}

void require_grid_aligned(const FiniteSignedMeasure& m, const Grid& grid) {
    if (m.tau() > grid.tau() + 1e-12 * std::max(1.0, grid.tau()))
        throw DomainError("measure support exceeds the grid's delay window");
    for (const Atom& a : m.atoms())
        (void)aligned_index(a.location, grid.h(), "atom location");
    for (const DensityPiece& p : m.density()) {
        (void)aligned_index(p.left, grid.h(), "density piece boundary");
        (void)aligned_index(p.right, grid.h(), "density piece boundary");
    }
}

namespace detail {

IndexedMeasure::IndexedMeasure(const FiniteSignedMeasure& m, const Grid& grid) {
    require_grid_aligned(m, grid);
    atoms.reserve(m.atoms().size());
    for (const Atom& a : m.atoms())
        atoms.push_back({aligned_index(a.location, grid.h(), "atom location"),
                         a.weight});
    pieces.reserve(m.density().size());
    for (const DensityPiece& p : m.density())
        pieces.push_back(
            {aligned_index(p.left, grid.h(), "density piece boundary"),
             aligned_index(p.right, grid.h(), "density piece boundary"),
             p.value});
}

double IndexedMeasure::convolve(const FunctionTable& f, std::int64_t t_index,
                                double h) const {
    double s = 0.0;
    for (const IndexedAtom& a : atoms) s += a.weight * f.at(t_index + a.offset);
    for (const IndexedPiece& p : pieces) {
        // Trapezoid of value * f over [t + left, t + right].
        double acc = 0.5 * (f.at(t_index + p.left) + f.at(t_index + p.right));
        for (std::int64_t j = p.left + 1; j < p.right; ++j)
            acc += f.at(t_index + j);
        s += p.value * h * acc;
    }
    return s;
}

} // namespace detail

double convolve_measure(const FiniteSignedMeasure& m, const FunctionTable& f,
                        std::int64_t t_index) {
    detail::IndexedMeasure im(m, f.grid());
    return im.convolve(f, t_index, f.grid().h());
}

} // namespace msfde
