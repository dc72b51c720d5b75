#pragma once

#include <stdexcept>
#include <string>

namespace tqdeim {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Malformed .t3b payload, bad magic, inconsistent model bundle.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Invalid user-supplied configuration (CLI flags, generator configs).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Rank out of range, singular systems, unstable or divergent time stepping.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularError : public NumericalError {
public:
    SingularError(const std::string& what, std::size_t slice)
        : NumericalError(what), slice_(slice) {}

    // 1-based Fourier slice that failed.
    std::size_t slice() const noexcept { return slice_; }

private:
    std::size_t slice_;
};

struct Warning {
    std::string code;
    std::string message;
};

} // namespace tqdeim
