#pragma once
// Error hierarchy. The CLI maps ConfigError to exit code 1 and every other
// Error (numerical failures) to exit code 2, so the split is load-bearing.

#include <stdexcept>
#include <string>

namespace msfde {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument / violated precondition at an API boundary.
class DomainError : public Error {
public:
    using Error::Error;
};

// Implicit marching step is singular or sign-flipping; caller must reduce h.
class StepSizeError : public Error {
public:
    using Error::Error;
};

// Two independent computations of the same quantity disagree beyond the
// scheme's expected error; indicates a genuine numerical breakdown.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// A stated precondition of an operation does not hold for this input
// (e.g. kernel not subcritical for the critical-rate solve).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Asymptotic checkers refuse horizons too short to say anything.
class InsufficientHorizonError : public Error {
public:
    using Error::Error;
};

// Config file problems; message carries line number and offending key.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace msfde
