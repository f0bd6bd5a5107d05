#pragma once

#include <stdexcept>

namespace sharedctl {

// Every error the library throws derives from Error, so callers that only
// care about "something in sharedctl failed" can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Transition parameters outside the probability simplex.
class InvalidParams : public Error {
 public:
  using Error::Error;
};

// An observed action that is not a member of the observation model's action set.
class ActionNotInSet : public Error {
 public:
  using Error::Error;
};

// The filter's normalizer underflowed: the observation stream has (numerically)
// zero probability under every hidden state.
class DegenerateBelief : public Error {
 public:
  using Error::Error;
};

// Malformed or unresolvable scenario / experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A success-only metric was requested for a log that did not succeed.
class NotSuccessful : public Error {
 public:
  using Error::Error;
};

class EmptyBatch : public Error {
 public:
  using Error::Error;
};

// A client message the session cannot interpret. The session stays alive.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Input arrived for an episode that has already finished.
class SessionClosed : public Error {
 public:
  using Error::Error;
};

}  // namespace sharedctl
