#include "msfde/grid.hpp"

#include <cmath>
#include <string>

namespace msfde {

std::int64_t aligned_index(double x, double h, const char* what) {
    const double q = x / h;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-6 * std::max(1.0, std::abs(q)))
        throw DomainError(std::string(what) +
                          " is not an integer multiple of the grid step");
    return static_cast<std::int64_t>(r);
}

Grid::Grid(double h, double T, double tau) : h_(h), T_(T), tau_(tau) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw DomainError("grid step h must be positive and finite");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw DomainError("delay tau must be positive and finite");
    if (!(T >= h) || !std::isfinite(T))
        throw DomainError("horizon T must be at least one step");
    n_steps_ = aligned_index(T, h, "horizon T");
    n_delay_ = aligned_index(tau, h, "delay tau");
}

bool Grid::operator==(const Grid& other) const {
    return h_ == other.h_ && T_ == other.T_ && tau_ == other.tau_;
}

FunctionTable::FunctionTable(const Grid& grid, std::int64_t start_index,
                             std::vector<double> values)
    : grid_(grid), start_(start_index), values_(std::move(values)) {
    if (values_.empty())
        throw DomainError("FunctionTable: empty value sequence");
    if (start_ < -grid_.n_delay())
        throw DomainError("FunctionTable: domain starts before -tau");
    if (end_index() > grid_.n_steps())
        throw DomainError("FunctionTable: domain extends beyond horizon T");
}

} // namespace msfde
