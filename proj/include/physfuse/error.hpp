#pragma once

#include <stdexcept>
#include <string>

namespace physfuse {

/// Broad failure category. The CLI maps these onto exit codes.
enum class ErrorKind {
  validation,  // bad input values or schema
  io,          // files, streams
  domain,      // numeric precondition (no evidence, undefined moments, ...)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::domain, what) {}
};

/// Raised by the moments posterior when W == 0; callers fall back to priors.
class NoEvidenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace physfuse
