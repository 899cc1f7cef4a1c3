#ifndef JUMPLDP_ERRORS_HPP
#define JUMPLDP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace jumpldp {

// Base class for all library errors. CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class OutOfDomainError : public Error {
 public:
  explicit OutOfDomainError(const std::string& msg) : Error("OutOfDomain: " + msg) {}
};

class RateSyntaxError : public Error {
 public:
  RateSyntaxError(const std::string& msg, std::size_t offset)
      : Error("SyntaxError at offset " + std::to_string(offset) + ": " + msg), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifierError : public Error {
 public:
  explicit UnknownIdentifierError(const std::string& name)
      : Error("UnknownIdentifier: '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DivisionUnsupportedError : public Error {
 public:
  explicit DivisionUnsupportedError(std::size_t offset)
      : Error("DivisionUnsupported: '/' at offset " + std::to_string(offset)) {}
};

class UnboundParameterError : public Error {
 public:
  explicit UnboundParameterError(const std::string& name)
      : Error("UnboundParameter: '" + name + "'") {}
};

class NoConvergenceError : public Error {
 public:
  explicit NoConvergenceError(const std::string& msg) : Error("NoConvergence: " + msg) {}
};

class LeftDomainError : public Error {
 public:
  explicit LeftDomainError(const std::string& msg) : Error("LeftDomain: " + msg) {}
};

class HorizonMismatchError : public Error {
 public:
  explicit HorizonMismatchError(const std::string& msg) : Error("HorizonMismatch: " + msg) {}
};

class WindowMismatchError : public Error {
 public:
  explicit WindowMismatchError(const std::string& msg) : Error("WindowMismatch: " + msg) {}
};

class BadEpsilonError : public Error {
 public:
  explicit BadEpsilonError(const std::string& msg) : Error("BadEpsilon: " + msg) {}
};

class InfeasibleWindowError : public Error {
 public:
  InfeasibleWindowError(int window, const std::string& msg)
      : Error("InfeasibleWindow " + std::to_string(window) + ": " + msg), window_(window) {}
  int window() const { return window_; }

 private:
  int window_;
};

class NotBirthDeathError : public Error {
 public:
  explicit NotBirthDeathError(const std::string& msg) : Error("NotBirthDeath: " + msg) {}
};

class EmptyBoundaryError : public Error {
 public:
  explicit EmptyBoundaryError(const std::string& msg) : Error("EmptyBoundary: " + msg) {}
};

class ModelFormatError : public Error {
 public:
  explicit ModelFormatError(const std::string& msg) : Error("ModelFormat: " + msg) {}
};

// Violated call precondition (bad argument combinations, predicates false at start, ...).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& msg) : Error("Precondition: " + msg) {}
};

// A replicate of an ensemble failed; carries the replicate index.
class ReplicateError : public Error {
 public:
  ReplicateError(int replicate, const std::string& msg)
      : Error("replicate " + std::to_string(replicate) + ": " + msg), replicate_(replicate) {}
  int replicate() const { return replicate_; }

 private:
  int replicate_;
};

}  // namespace jumpldp

#endif
