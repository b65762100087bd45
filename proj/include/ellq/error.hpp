#pragma once

#include <stdexcept>
#include <string>

namespace ellq {

/// Base of every error raised by the library. Each subclass maps onto one
/// failure family so callers (and the CLI exit-code logic) can dispatch on type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter is outside its documented domain.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Element-level assembly failed (non-positive coefficient, bad mass entry).
class AssemblyError : public Error {
public:
    using Error::Error;
};

/// A dense operation was requested above the configured size ceiling.
class SizeLimitExceeded : public Error {
public:
    using Error::Error;
};

/// Cholesky or eigensolver breakdown.
class FactorizationError : public Error {
public:
    using Error::Error;
};

/// Non-finite values appeared during time integration.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// The checkpoint scan ran out of checkpoints without accepting one.
class NoEntryError : public Error {
public:
    NoEntryError(const std::string& what, double last_p_hat)
        : Error(what), last_p_hat_(last_p_hat) {}
    [[nodiscard]] double last_p_hat() const noexcept { return last_p_hat_; }

private:
    double last_p_hat_;
};

}  // namespace ellq
