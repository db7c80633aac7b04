// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace cfmm {

/// Input outside the domain of a trading function (a reserve <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed arguments or configuration.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The pool refused a trade; the pool state is left untouched.
class RejectedTrade : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Base for numerical failures: no convergence, no bracket, singular systems,
/// infeasible linear programs.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public SolverError {
public:
    using SolverError::SolverError;
};

class BracketError : public SolverError {
public:
    using SolverError::SolverError;
};

class SingularSystemError : public SolverError {
public:
    using SolverError::SolverError;
};

class NoSolutionError : public SolverError {
public:
    using SolverError::SolverError;
};

class InfeasibleLpError : public SolverError {
public:
    using SolverError::SolverError;
};

class DegenerateProbeError : public SolverError {
public:
    using SolverError::SolverError;
};

/// A trading-function family the requested procedure cannot handle
/// (e.g. the strictly-concave reconstruction on a constant-sum pool).
class UnsupportedFamily : public ValidationError {
public:
    using ValidationError::ValidationError;
};

}  // namespace cfmm
