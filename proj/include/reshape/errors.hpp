#pragma once

#include <stdexcept>
#include <string>

namespace reshape {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied data that violates an operation's precondition.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A prediction rule produced a non-finite value or a model is malformed.
class InvalidModel : public Error {
public:
    using Error::Error;
};

/// A model, tensor, or data file could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A solver post-condition failed. Indicates a bug, not bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace reshape
