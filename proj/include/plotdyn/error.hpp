#pragma once

#include <stdexcept>
#include <string>

namespace plotdyn {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, option values or mapping files (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Unreadable or malformed input data (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

/// Numerically degenerate input, e.g. a Bayes step with zero normaliser.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

}  // namespace plotdyn
