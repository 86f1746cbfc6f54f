#pragma once

#include <stdexcept>
#include <string>

namespace shelfscan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad dimensions, empty input, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Image or file could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Structured file content does not conform to its schema.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Run configuration is malformed or contains unknown keys.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace shelfscan
