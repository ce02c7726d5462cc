// Dual-rate control loop. A fast observer samples frames, a slow deliberator
// picks the current subtask and nominates keyframes, and a fast action policy
// expands the latched subtask into motor chunks executed open loop. All three
// run on one virtual clock, so a whole episode is a pure function of
// (world seed, policy seeds, config).
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfm/log.hpp"
#include "kfm/memory.hpp"
#include "kfm/simenv.hpp"

namespace kfm {

struct RunConfig {
  std::int64_t obs_period_ms = 500;
  std::int64_t hl_period_ms = 1000;
  std::int64_t ll_period_ms = 500;
  int chunk_len = 15;      // actions produced per fast-policy inference
  int open_loop_exec = 8;  // prefix of the chunk executed before re-planning
  int window = 8;          // recent frames shown to the deliberator
  int merge_distance = 5;
  int keyframe_cap = 8;
  std::int64_t max_ticks = 240;  // frame budget before the episode times out

  void validate() const;  // throws ConfigError
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Everything the deliberator is allowed to see. Pointers borrow from the
/// orchestrator's frame store for the duration of one decision.
struct HlContext {
  std::int64_t tick = 0;  // frame index of the newest window entry
  std::string instruction;
  std::vector<const Observation*> window;     // oldest to newest
  std::vector<const Observation*> keyframes;  // ascending frame index
  std::vector<std::string> text_memory;       // committed subtask labels
};

struct HlDecision {
  std::string subtask;
  std::vector<int> nominate;  // 1-indexed positions into the window
  bool fallback = false;      // decision came from the exploration prior
};

class HlPolicy {
 public:
  virtual ~HlPolicy() = default;
  virtual HlDecision decide(const HlContext& ctx) = 0;
  virtual std::string name() const = 0;
};

struct LlContext {
  std::int64_t tick = 0;  // frame index of the newest frame
  std::string subtask;
  const Observation* newest = nullptr;
};

class LlPolicy {
 public:
  virtual ~LlPolicy() = default;
  virtual std::vector<Action> plan(const LlContext& ctx) = 0;
  virtual std::string name() const = 0;
};

struct EpisodeResult {
  std::vector<Record> records;
  bool completed = false;  // true when the world reached its end state
  TaskScore final_score;
  std::int64_t obs_ticks = 0;
  std::string digest;  // world digest at the final record
};

/// Runs one episode to completion or timeout and returns the full log.
/// Frame zero is sampled before the first decision, so the deliberator
/// never runs on an empty window.
EpisodeResult run_episode(TaskEnv& env, HlPolicy& hl, LlPolicy& ll,
                          const RunConfig& cfg);

struct ReplayResult {
  bool identical = false;
  std::string logged_digest;
  std::string replayed_digest;
  std::int64_t transitions = 0;
};

/// Rebuilds the world from the header record, re-executes every logged
/// observation and transition in order, and compares end-state digests.
ReplayResult replay_log(const std::vector<Record>& records);

}  // namespace kfm
