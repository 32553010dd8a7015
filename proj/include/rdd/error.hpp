#pragma once

#include <stdexcept>
#include <string>

namespace rdd {

// Process exit codes used by the CLI. Every library error maps onto one.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
public:
    Error(const std::string& what, ExitCode code)
        : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

// Invalid configuration value or shape mismatch between configured objects.
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(w, ExitCode::usage) {}
};

// Bad argument to an operation (empty batch, wrong dimension, ...).
struct ArgumentError : Error {
    explicit ArgumentError(const std::string& w) : Error(w, ExitCode::usage) {}
};

// Timestep or element index outside its valid range.
struct IndexError : Error {
    explicit IndexError(const std::string& w) : Error(w, ExitCode::usage) {}
};

// Query outside the domain of a physical model.
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(w, ExitCode::data) {}
};

// Malformed input file (CSV, JSON, binary model).
struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error(w, ExitCode::data) {}
};

// Missing or unwritable file.
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(w, ExitCode::data) {}
};

// Hull parameters that do not describe a valid hull.
struct InfeasibleHullError : Error {
    explicit InfeasibleHullError(const std::string& w) : Error(w, ExitCode::data) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& w) : Error(w, ExitCode::numerical) {}
};

// Non-finite loss, gradient or parameter during optimisation.
struct TrainingDivergence : NumericalError {
    explicit TrainingDivergence(const std::string& w) : NumericalError(w) {}
};

}  // namespace rdd
