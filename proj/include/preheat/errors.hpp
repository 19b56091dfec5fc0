#pragma once

#include <stdexcept>
#include <string>

namespace preheat {

/// Invalid parameters or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched grids or array sizes.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation outside the domain of a function (e.g. beyond the hard wall).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numerical failure: non-convergence, instability, blow-up (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class InstabilityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BlowUpError : public NumericalError {
public:
    BlowUpError(const std::string& what, std::size_t trajectory, double time)
        : NumericalError(what), trajectory_(trajectory), time_(time) {}
    std::size_t trajectory() const noexcept { return trajectory_; }
    double time() const noexcept { return time_; }

private:
    std::size_t trajectory_;
    double time_;
};

/// Target chemical potential cannot be reached with U >= 0 (CLI exit code 4).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace preheat
