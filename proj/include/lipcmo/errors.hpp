#pragma once

#include <stdexcept>
#include <string>

namespace lipcmo {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input shape or parameter (CLI exit 2).
class ArgumentError : public Error {
public:
    using Error::Error;
};

class ValidationError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

// Geometry or numerics that the grid cannot support (CLI exit 3).
class DomainError : public Error {
public:
    using Error::Error;
};

class ResolutionError : public DomainError {
public:
    using DomainError::DomainError;
};

class CapacityError : public DomainError {
public:
    using DomainError::DomainError;
};

class ScaleUnresolvable : public DomainError {
public:
    using DomainError::DomainError;
};

class ConstructionError : public DomainError {
public:
    using DomainError::DomainError;
};

class PreconditionError : public DomainError {
public:
    using DomainError::DomainError;
};

} // namespace lipcmo
