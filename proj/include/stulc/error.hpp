#pragma once

#include <stdexcept>
#include <string>

namespace stulc {

// Exit codes used by the command-line tool. Library code never calls exit();
// it throws one of the exceptions below and the tool maps them.
enum class ExitCode : int {
    ok = 0,
    config_error = 2,
    numeric_failure = 3,
    validation_failure = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::numeric_failure; }
};

/// Bad or inconsistent input parameters (including unknown config keys).
class ConfigError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::config_error; }
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Geometry that has no solution (e.g. an offset only reachable at grazing incidence).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Iterative or quadrature procedure did not converge. Carries the best
/// estimate available when the budget ran out.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what, double estimate = 0.0, double error_bound = 0.0)
        : Error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw ConfigError(message);
    }
}

} // namespace stulc
