#pragma once

#include <stdexcept>
#include <string>

namespace kfm {

struct PositionOutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonMonotonicTick : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCluster : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownTask : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IncompleteEpisode : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Wraps any exception escaping a policy; carries the tick it happened at.
struct PolicyError : std::runtime_error {
  long long tick = -1;
  PolicyError(const std::string& what, long long tick_)
      : std::runtime_error(what + " (tick " + std::to_string(tick_) + ")"), tick(tick_) {}
};

struct EmptyWindow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoSubtaskYet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownSubtask : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Signalled by a policy whose visible context cannot determine the next
/// subtask. Ablation wrappers catch it and fall back to the exploration prior.
struct InsufficientInformation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UncoveredLabel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorruptFile : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LengthMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoTransitions : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kfm
