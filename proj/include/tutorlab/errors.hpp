#pragma once

#include <stdexcept>
#include <string>

namespace tutorlab {

// Root of every error thrown by the library. Callers that only need to
// report failures can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (manifests, vocabulary, model and
// importance files).
class IngestionError : public Error {
 public:
  using Error::Error;
};

// Invalid argument to an otherwise well-formed call.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Training or numerical failure (degenerate data, singular systems).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Operation not allowed in the current session phase.
class StateError : public Error {
 public:
  using Error::Error;
};

// A server-side timer gate has not elapsed yet.
class TimerNotElapsed : public StateError {
 public:
  using StateError::StateError;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class EnrollmentClosed : public Error {
 public:
  using Error::Error;
};

class DuplicateParticipant : public Error {
 public:
  using Error::Error;
};

// Event log failed checksum, sequencing or parse validation.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Exhaustive search would exceed its configured work bound.
class LimitExceeded : public Error {
 public:
  using Error::Error;
};

// Statistical test called on data it cannot handle.
class StatisticsError : public Error {
 public:
  using Error::Error;
};

}  // namespace tutorlab
