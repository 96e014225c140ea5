#pragma once
// Uniform time mesh shared by all sampled functions, and the sampled-function
// table itself. Node k sits at time k*h; k may be negative (delay history).

#include <cstdint>
#include <span>
#include <vector>

#include "msfde/errors.hpp"

namespace msfde {

// Returns the integer n with |x/h - n| tiny, or throws DomainError tagged
// with `what` when x is not an integer multiple of h.
std::int64_t aligned_index(double x, double h, const char* what);

class Grid {
public:
    // tau/h and T/h must be integer (within rounding tolerance); h, tau > 0,
    // T >= h.
    Grid(double h, double T, double tau);

    double h() const { return h_; }
    double T() const { return T_; }
    double tau() const { return tau_; }
    std::int64_t n_steps() const { return n_steps_; }  // T/h
    std::int64_t n_delay() const { return n_delay_; }  // tau/h
    double time(std::int64_t k) const { return static_cast<double>(k) * h_; }

    bool operator==(const Grid& other) const;

private:
    double h_;
    double T_;
    double tau_;
    std::int64_t n_steps_;
    std::int64_t n_delay_;
};

// Real function sampled on grid nodes [start_index, start_index + size - 1].
// Evaluation below the domain yields 0 (the resolvent's zero-history
// convention); evaluation above the domain is a domain error.
class FunctionTable {
public:
    FunctionTable(const Grid& grid, std::int64_t start_index,
                  std::vector<double> values);

    const Grid& grid() const { return grid_; }
    std::int64_t start_index() const { return start_; }
    std::int64_t end_index() const {
        return start_ + static_cast<std::int64_t>(values_.size()) - 1;
    }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> mutable_values() { return values_; }

    // Node accessor with the zero extension below the domain.
    double at(std::int64_t k) const {
        if (k < start_) return 0.0;
        if (k > end_index())
            throw DomainError("FunctionTable: index beyond table domain");
        return values_[static_cast<std::size_t>(k - start_)];
    }

    // Raw accessor relative to start_index (no extension, no checks).
    double raw(std::size_t i) const { return values_[i]; }

private:
    Grid grid_;
    std::int64_t start_;
    std::vector<double> values_;
};

// Table on [0, T] filled from fn(t) at every node.
template <class Fn>
FunctionTable sample_on_horizon(const Grid& grid, Fn&& fn) {
    std::vector<double> v(static_cast<std::size_t>(grid.n_steps()) + 1);
    for (std::int64_t k = 0; k <= grid.n_steps(); ++k)
        v[static_cast<std::size_t>(k)] = fn(grid.time(k));
    return FunctionTable(grid, 0, std::move(v));
}

// Table on [-tau, 0] filled from fn(t) at every node.
template <class Fn>
FunctionTable sample_on_delay(const Grid& grid, Fn&& fn) {
    std::vector<double> v(static_cast<std::size_t>(grid.n_delay()) + 1);
    for (std::int64_t k = -grid.n_delay(); k <= 0; ++k)
        v[static_cast<std::size_t>(k + grid.n_delay())] = fn(grid.time(k));
    return FunctionTable(grid, -grid.n_delay(), std::move(v));
}

} // namespace msfde
