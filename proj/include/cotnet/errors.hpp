#pragma once

#include <stdexcept>
#include <string>

namespace cotnet {

// Precondition violation on an operation input (non-positive distance,
// empty user list, k out of range, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad experiment configuration; maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Brute-force grid would exceed the evaluation budget.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Strategy block that is not parseable as JSON.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backend reply without a ```strategy fenced block.
class MalformedReply : public ParseError {
 public:
  using ParseError::ParseError;
};

// Parsed command violates the schema or scenario bounds; never clamped.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Intent text with no recognizable objective keyword.
class UnrecognizedIntent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// HTTP failure talking to an LLM or embedding endpoint; maps to CLI exit
// code 3. status is the HTTP status, or 0 for connection-level failures.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, int status, int attempts = 1)
      : std::runtime_error(what), status_(status), attempts_(attempts) {}
  int status() const { return status_; }
  int attempts() const { return attempts_; }

 private:
  int status_;
  int attempts_;
};

class TimeoutError : public TransportError {
 public:
  explicit TimeoutError(const std::string& what, int attempts = 1)
      : TransportError(what, 0, attempts) {}
};

}  // namespace cotnet
