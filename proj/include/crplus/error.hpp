#pragma once

#include <stdexcept>
#include <string>

namespace crplus {

// Base of every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unusable input: bad CSV, bad flags, missing files.
class InputError : public Error {
public:
    using Error::Error;
};

// The model cannot be evaluated for the given inputs.
class ModelError : public Error {
public:
    using Error::Error;
};

}  // namespace crplus
