#pragma once

#include <stdexcept>
#include <string>

namespace gsc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a kernel function.
class DomainError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Response not admissible for the loss (e.g. logistic y outside {-1, +1}).
class InvalidLabel : public Error {
public:
    using Error::Error;
};

class NumericOverflow : public Error {
public:
    using Error::Error;
};

class EmptyDataset : public Error {
public:
    using Error::Error;
};

/// Hessian could not be factorized as positive definite, even after jitter.
class SingularHessian : public Error {
public:
    using Error::Error;
};

class NonConverged : public Error {
public:
    using Error::Error;
};

class MissingSampler : public Error {
public:
    using Error::Error;
};

class TooManyFailures : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `row` and `column` are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : Error(what), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

}  // namespace gsc
