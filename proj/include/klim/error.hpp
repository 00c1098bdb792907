#pragma once

#include <stdexcept>
#include <string>

namespace klim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (bad parameters, wrong regime, bad grid).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A time or abscissa left the domain an operation is defined on.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A configuration document failed validation; `field()` names the offending key.
class ConfigError : public PreconditionError {
public:
    ConfigError(std::string field, const std::string& message)
        : PreconditionError(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// The requested quantity has no implementation for this input (e.g. a non-Gaussian covariance).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature failed to reach its tolerance.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// Every simulated path crossed the explosion threshold.
class ExplosionError : public Error {
public:
    ExplosionError(double fraction, const std::string& message)
        : Error(message), fraction_(fraction) {}

    double exploded_fraction() const noexcept { return fraction_; }

private:
    double fraction_;
};

}  // namespace klim
