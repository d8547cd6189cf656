#pragma once

#include <stdexcept>
#include <string>

namespace fracinv {

/// Bad argument or grid mismatch supplied by the caller.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an experiment does not hold (e.g. an initial
/// value that touches zero). The experiment is meaningless and is not run.
class PreconditionViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numerical failure inside a solver: singular system, eigen-solver breakdown.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fixed-point iteration hit its iteration cap before reaching tolerance.
class NonConvergence : public SolverFailure {
public:
    NonConvergence(const std::string& what, double last_update_norm, int iterations)
        : SolverFailure(what), last_update_norm_(last_update_norm), iterations_(iterations) {}

    double last_update_norm() const noexcept { return last_update_norm_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_update_norm_;
    int iterations_;
};

} // namespace fracinv
