#pragma once

#include <stdexcept>
#include <string>

namespace sparsevar {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed model: wrong shapes, non-finite entries, asymmetric or indefinite covariance.
class InvalidModelError : public Error {
public:
    using Error::Error;
};

/// Model violates the stability (causality) condition.
class UnstableModelError : public Error {
public:
    using Error::Error;
};

/// Input too short or shapes inconsistent.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Bad argument value (negative threshold, out-of-range index, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// The de-biasing denominator (Z^T L^s X_r) vanished for column (lag, var).
class DegenerateDenominatorError : public Error {
public:
    DegenerateDenominatorError(int lag, int var, const std::string& what)
        : Error(what), lag_(lag), var_(var) {}
    int lag() const noexcept { return lag_; }
    int var() const noexcept { return var_; }

private:
    int lag_;
    int var_;
};

/// Numerical failure during a computation (e.g. every bootstrap replicate failed).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Text input (model file, CSV, group file) could not be parsed.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int column)
        : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

} // namespace sparsevar
