#pragma once

#include <stdexcept>
#include <string>

namespace specpot {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape mismatch between a function and the objects it operates on.
struct DimensionError : Error {
    using Error::Error;
};

// A scalar or structural argument is outside its admissible range.
struct ArgumentError : Error {
    using Error::Error;
};

// An operator entry is negative.
struct PositivityError : Error {
    using Error::Error;
};

// An operator entry sits off the graph of the underlying map.
struct SupportError : Error {
    using Error::Error;
};

// A measure fails the simplex invariants (nonnegativity, unit mass).
struct NormalizationError : Error {
    using Error::Error;
};

// The operation needs a strongly connected support graph and did not get one.
struct ReducibleOperatorError : Error {
    using Error::Error;
};

// The input lies outside the domain the operation is defined on.
struct DomainError : Error {
    using Error::Error;
};

// No descent direction exists: the measure is already invariant.
struct NoDirectionError : Error {
    using Error::Error;
};

// The witness construction hit a point where its logarithm argument vanishes.
struct DegenerateSupportError : Error {
    using Error::Error;
};

// A guaranteed bound failed numerically; inputs were likely inconsistent.
struct PostconditionError : Error {
    using Error::Error;
};

// An iterative solver ran out of budget; carries the best estimate reached.
struct ConvergenceError : Error {
    double best_estimate;
    ConvergenceError(const std::string& what, double best)
        : Error(what), best_estimate(best) {}
};

// Scenario ingestion failure; names the offending field.
struct ParseError : Error {
    std::string field;
    ParseError(const std::string& field_name, const std::string& what)
        : Error(field_name + ": " + what), field(field_name) {}
};

}  // namespace specpot
