#pragma once

#include <stdexcept>
#include <string>

namespace vh {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: grid sizes, scale ranges, schema violations.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class ScaleRangeError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// An operator failed its hypothesis gate (e.g. T*1 != 0).
class GateRefusal : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

// Two independent numerical routes disagree beyond tolerance.
class NumericalIntegrityError : public Error {
public:
    using Error::Error;
};

} // namespace vh
