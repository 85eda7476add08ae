#pragma once

#include <stdexcept>
#include <string>

namespace keyforge {

// Base class for all keyforge errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed external input (log lines, spec files, JSON documents).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Violated precondition or domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A required feature has too few observations.
class AvailabilityError : public Error {
 public:
  AvailabilityError(const std::string& feature)
      : Error("feature unavailable: " + feature), feature_(feature) {}
  const std::string& feature() const { return feature_; }

 private:
  std::string feature_;
};

// Plaintext magnitude would not fit the homomorphic plaintext space.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Eigensolver failure or residual out of bounds.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Message shape or content violates the protocol contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Round arrived out of order within an enrollment session.
class SessionError : public Error {
 public:
  using Error::Error;
};

// Frame-level decode failure on the wire.
class WireError : public Error {
 public:
  using Error::Error;
};

}  // namespace keyforge
