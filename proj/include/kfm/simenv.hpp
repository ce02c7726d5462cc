#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfm/scene.hpp"

// Seeded symbolic environments for the three tasks. Each world is fully
// deterministic given its seed, advances only through primitive actions, and
// reveals its hidden structure only through the transient observation
// payloads (bin contents while inspecting, single-frame pours, dust strokes,
// removal/placement events). Observations sampled outside those moments carry
// no trace of the hidden state, which is what makes long-horizon decisions
// depend on remembering the right frames.

namespace kfm {

enum class ActionKind {
  move_to,  ///< trajectory progress, no world effect
  look,     ///< begin inspecting a bin (search)
  grasp,    ///< pick up / remove (object or tool)
  pour,     ///< tip one scoop into a bowl (counting)
  dust,     ///< wipe a shelf (dust)
  place,    ///< put the held thing somewhere
  park,     ///< return a tool to its neutral spot
  hold,     ///< keep pose; leaves transient events visible
  retry,    ///< injected failure no-op
};

std::string to_string(ActionKind k);
ActionKind action_kind_from_string(const std::string& s);

struct Action {
  ActionKind kind = ActionKind::hold;
  std::string target;  ///< bin / shelf / bowl color / "white" / "table" / tool name
  std::string object;  ///< object label or ingredient, when relevant

  bool operator==(const Action&) const = default;
};

nlohmann::json to_json(const Action& a);
Action action_from_json(const nlohmann::json& j);

struct ApplyResult {
  bool illegal = false;   ///< rejected; world unchanged
  bool terminal = false;  ///< world reached its end state
  std::string note;       ///< short effect description for the episode log
};

/// Per-episode outcome counters. Search scores retrieval and optimal-path
/// adherence (one point each per instruction, max 6); counting scores the
/// absolute scoop error (lower is better, 0 is perfect); dust scores four
/// binaries.
struct TaskScore {
  Task task = Task::search;
  int retrieved = 0;
  int optimal = 0;
  int wrong_scoops = 0;
  bool dusted_bottom = false;
  bool dusted_top = false;
  bool replaced_bottom = false;
  bool replaced_top = false;

  bool perfect() const;
  int points() const;      ///< earned points (search/dust); 0-penalty for counting
  int max_points() const;  ///< 6 for search, 4 for dust, 0 for counting
};

nlohmann::json to_json(const TaskScore& s);
TaskScore task_score_from_json(const nlohmann::json& j);

class TaskEnv {
 public:
  virtual ~TaskEnv() = default;
  virtual Task task() const = 0;
  virtual std::uint64_t seed() const = 0;

  /// Samples the frame for `idx`. Consumes single-frame events (pours), so
  /// call exactly once per frame index, in order.
  virtual Observation observe(FrameIndex idx) = 0;

  /// Applies one primitive action. Illegal actions are reported, not thrown,
  /// and leave the world unchanged so the caller can retry.
  virtual ApplyResult apply(const Action& a) = 0;

  virtual bool terminal() const = 0;
  virtual std::string instruction() const = 0;

  /// Canonical hidden-state dump; scorer, fixtures, and digests only. Never
  /// reachable from an Observation.
  virtual nlohmann::json hidden_state() const = 0;

  /// Raw outcome counters as of now (no completeness check).
  virtual TaskScore score_now() const = 0;
};

/// Deterministic seeded world. Search draws 3-5 objects across the bins and
/// three sequential targets; counting draws two (ingredient -> bowl) requests
/// of 2-4 scoops; dust draws two distinct shelf objects.
std::unique_ptr<TaskEnv> make_env(Task task, std::uint64_t seed);

/// Rebuilds a world from a fixture's hidden-state JSON.
std::unique_ptr<TaskEnv> env_from_fixture(const nlohmann::json& fixture);

/// Instance generators whose layouts force memory-dependent decisions:
/// search places the first target away from the leftmost bin and a later
/// target in an earlier-inspected bin; counting guarantees every request
/// needs at least two scoops; dust pairs the instance with a scripted
/// low-level stall on "reset duster" long enough to push the bottom-shelf
/// stroke out of the recent window, and orders the shelf objects so a
/// sorted-order fallback replaces them wrongly.
nlohmann::json make_adversarial_fixture(Task task, std::uint64_t seed);

/// Final score. `complete` asserts the episode actually ended (terminal or
/// recorded timeout); otherwise IncompleteEpisode.
TaskScore score(const TaskEnv& env, bool complete);

/// Digest of the canonical hidden-state serialization.
std::string state_digest(const TaskEnv& env);

}  // namespace kfm
