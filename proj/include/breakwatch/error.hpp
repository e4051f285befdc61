#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace breakwatch {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad dimensions, parameters or preconditions supplied by the caller.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// History too short to leave any residual degrees of freedom.
class DegreesOfFreedomError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Failures of the numerical pipeline itself.
class NumericalError : public Error {
public:
    using Error::Error;
};

class RankDeficiencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A valid pixel whose history is fit exactly (sigma == 0).
class DegenerateScaleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Problems with external data: files, streams, text.
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class CapacityError : public DataError {
public:
    using DataError::DataError;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace breakwatch
