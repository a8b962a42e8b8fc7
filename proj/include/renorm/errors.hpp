#pragma once

#include <stdexcept>
#include <string>

namespace renorm {

/// Base class for every error raised by the library. Carries the process exit
/// code the command-line front end maps it to.
class Error : public std::runtime_error {
public:
    Error(const std::string& what, int exitCode) : std::runtime_error(what), exitCode_(exitCode) {}
    int exit_code() const noexcept { return exitCode_; }

private:
    int exitCode_;
};

/// Invalid input: parameters outside an operation's preconditions.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what, 2) {}
};

/// Evaluation requested at a singular point of a map (e.g. an inversion center).
class SingularPointError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A numerical procedure did not reach its accuracy target.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, double bestValue, double achievedError)
        : Error(what, 3), bestValue_(bestValue), achievedError_(achievedError) {}
    double best_value() const noexcept { return bestValue_; }
    double achieved_error() const noexcept { return achievedError_; }

private:
    double bestValue_;
    double achievedError_;
};

/// Adaptive quadrature exhausted its depth budget.
class ToleranceNotMetError : public NonConvergenceError {
public:
    using NonConvergenceError::NonConvergenceError;
};

/// Least-squares design matrix is numerically rank deficient.
class IllConditionedFitError : public NonConvergenceError {
public:
    IllConditionedFitError(const std::string& what, double conditionNumber)
        : NonConvergenceError(what, 0.0, conditionNumber) {}
};

} // namespace renorm
