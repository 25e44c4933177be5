#pragma once

#include <stdexcept>
#include <string>

namespace modshift {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values or mismatched dimensions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Aggregation protocol violations: missing or duplicate agents, mixed rounds,
/// or secret-channel payloads that do not match the transmitted shift.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// The singularity constraint (or another mathematical precondition) does not
/// hold for the given inputs.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// An operation was invoked in a way its contract forbids.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Local descent produced non-finite weights. The round is filled in by the
/// experiment orchestrator, which knows it; the descent loop only knows the
/// agent and the local epoch.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, int agent_id, int local_epoch, int round = -1)
      : Error(msg), agent_id(agent_id), local_epoch(local_epoch), round(round) {}

  int agent_id;
  int local_epoch;
  int round;
};

}  // namespace modshift
