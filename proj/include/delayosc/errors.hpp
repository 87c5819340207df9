#pragma once

#include <stdexcept>
#include <string>

namespace delayosc {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A pivot fell below the singularity threshold while inverting an operator.
struct SingularOperator : Error {
    explicit SingularOperator(const std::string& what) : Error("SingularOperator: " + what) {}
};

/// An input (time, entry, coefficient) is NaN or infinite.
struct NonFiniteInput : Error {
    explicit NonFiniteInput(const std::string& what) : Error("NonFiniteInput: " + what) {}
};

/// An integrand sample came back NaN or infinite.
struct NonFiniteValue : Error {
    explicit NonFiniteValue(const std::string& what) : Error("NonFiniteValue: " + what) {}
};

/// Integration interval with a > b.
struct InvalidInterval : Error {
    explicit InvalidInterval(const std::string& what) : Error("InvalidInterval: " + what) {}
};

/// Evaluation time exceeds the evaluator's horizon guard.
struct ExcessiveHorizon : Error {
    explicit ExcessiveHorizon(const std::string& what) : Error("ExcessiveHorizon: " + what) {}
};

/// Query outside the domain of a function or solver.
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error("DomainError: " + what) {}
};

/// Data lacks the smoothness a representation requires.
struct SmoothnessError : Error {
    explicit SmoothnessError(const std::string& what) : Error("SmoothnessError: " + what) {}
};

/// Step size does not divide the segment length.
struct GridMismatch : Error {
    explicit GridMismatch(const std::string& what) : Error("GridMismatch: " + what) {}
};

/// Query time outside [0, T].
struct OutOfHorizon : Error {
    explicit OutOfHorizon(const std::string& what) : Error("OutOfHorizon: " + what) {}
};

/// Too few data points to fit a convergence slope.
struct SlopeUndefined : Error {
    explicit SlopeUndefined(const std::string& what) : Error("SlopeUndefined: " + what) {}
};

/// Scenario file failed to parse or validate; message names the field.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("ConfigError: " + what) {}
};

/// File could not be read or written.
struct IoError : Error {
    explicit IoError(const std::string& what) : Error("IoError: " + what) {}
};

}  // namespace delayosc
