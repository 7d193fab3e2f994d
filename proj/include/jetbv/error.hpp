#pragma once

#include <stdexcept>
#include <string>

namespace jetbv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by the mathematics of the request (grading violations,
/// unsupported dimensions, non-solvable systems, ...). The CLI maps these to
/// exit code 3.
class DomainError : public Error {
public:
  using Error::Error;
};

class GeneratorMismatchError : public DomainError {
public:
  using DomainError::DomainError;
};

class GradingError : public DomainError {
public:
  using DomainError::DomainError;
};

class InhomogeneousError : public GradingError {
public:
  using GradingError::GradingError;
};

class ZeroExpressionError : public GradingError {
public:
  using GradingError::GradingError;
};

class UnknownGeneratorError : public DomainError {
public:
  using DomainError::DomainError;
};

class UnknownVariableError : public DomainError {
public:
  using DomainError::DomainError;
};

class NotADivergenceError : public DomainError {
public:
  using DomainError::DomainError;
};

class UnsupportedDimensionError : public DomainError {
public:
  using DomainError::DomainError;
};

class ZeroVariablesError : public DomainError {
public:
  using DomainError::DomainError;
};

class MissingCharacteristicError : public DomainError {
public:
  using DomainError::DomainError;
};

class NotSolvableError : public DomainError {
public:
  using DomainError::DomainError;
};

class RewriteBudgetError : public DomainError {
public:
  using DomainError::DomainError;
};

class NotAnIdentityError : public DomainError {
public:
  using DomainError::DomainError;
};

class DuplicateGhostError : public DomainError {
public:
  using DomainError::DomainError;
};

class UnknownModelError : public DomainError {
public:
  using DomainError::DomainError;
};

} // namespace jetbv
