#pragma once

#include <stdexcept>
#include <string>

namespace epls {

// Error categories map one-to-one onto the CLI exit codes.
enum class ErrorKind {
    Usage = 1,
    Data = 2,
    Numerical = 3,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

// Inconsistent experiment or generator configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

// Input data that cannot be parsed or has the wrong shape.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

// Too few exceedances of the threshold for the requested statistic.
class InsufficientTailError : public Error {
public:
    explicit InsufficientTailError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

// A direction estimate with zero norm (or an otherwise undefined eigenproblem).
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace epls
