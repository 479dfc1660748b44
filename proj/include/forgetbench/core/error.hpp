#pragma once

#include <stdexcept>
#include <string>

namespace forgetbench {

// Root of every error the library raises. The CLI maps UserError subclasses
// to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UserError : public Error {
public:
    using Error::Error;
};

// Mismatched matrix or parameter shapes. Always a programming error.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A model was used in a state that does not support the call.
class StateError : public Error {
public:
    using Error::Error;
};

class InputError : public UserError {
public:
    using UserError::UserError;
};

class FormatError : public UserError {
public:
    using UserError::UserError;
};

class ConfigError : public UserError {
public:
    using UserError::UserError;
};

class DataError : public UserError {
public:
    using UserError::UserError;
};

// Sessions presented out of order, or a call that violates the training protocol.
class ProtocolError : public UserError {
public:
    using UserError::UserError;
};

class EvaluationError : public UserError {
public:
    using UserError::UserError;
};

}  // namespace forgetbench
