#pragma once

#include <stdexcept>
#include <string>

namespace nfqed {

/// Base of every error raised by the library. The C API maps each subclass
/// onto one status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Result not representable in double precision.
class OverflowError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The fiber supports no bound HE11 solution at the requested frequency.
class NoGuidedModeError : public Error {
public:
    using Error::Error;
};

/// More than one root of the HE eigenvalue equation in the guided window.
class MultimodeError : public Error {
public:
    using Error::Error;
};

/// A quadrature or series did not reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// The steady-state system is singular at some detuning.
class SingularSystemError : public Error {
public:
    SingularSystemError(const std::string& what, double delta)
        : Error(what), delta_(delta) {}
    double delta() const noexcept { return delta_; }

private:
    double delta_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Unreadable or inconsistent cache file.
class CacheError : public Error {
public:
    using Error::Error;
};

}  // namespace nfqed
