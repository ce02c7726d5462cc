// Decision policies. The deliberator family shares one rule engine and
// differs only in how much of the context it is allowed to read (full
// keyframe memory, newest frame, recent window, or committed-label text).
// The engine is a pure function of that view, so what each variant can and
// cannot solve follows entirely from what its view retains.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "kfm/grammar.hpp"
#include "kfm/orchestrator.hpp"

namespace kfm {

/// What a deliberator variant is allowed to read from the context.
enum class MemoryView {
  full,         ///< recent window + consolidated keyframes
  newest_only,  ///< single newest frame, nothing else
  window_only,  ///< recent window, no keyframes
  text_only,    ///< newest frame + committed subtask labels
};

std::string to_string(MemoryView v);

/// Rule-based deliberator. Decisions come from visible state plus whatever
/// evidence the view retains; when the evidence cannot support a decision it
/// falls back to a fixed exploration prior and flags the decision.
class EvidenceHl final : public HlPolicy {
 public:
  explicit EvidenceHl(MemoryView view) : view_(view) {}
  HlDecision decide(const HlContext& ctx) override;
  std::string name() const override { return to_string(view_); }

 private:
  MemoryView view_;
};

/// Wraps another deliberator and degrades its nominations: each inner
/// nomination is re-emitted for five consecutive decisions, and every
/// emission is independently perturbed with probability 1/4 by a nonzero
/// offset of at most `jitter` positions (clamped to the window). jitter = 0
/// is an exact passthrough. Subtask choices are never altered.
class NoisyNominator final : public HlPolicy {
 public:
  NoisyNominator(std::unique_ptr<HlPolicy> inner, int jitter,
                 std::uint64_t seed);
  HlDecision decide(const HlContext& ctx) override;
  std::string name() const override;

 private:
  std::unique_ptr<HlPolicy> inner_;
  int jitter_;
  std::mt19937_64 rng_;
  std::map<FrameIndex, int> pending_;  // abs frame -> emissions left
};

/// Per-subtask failure injection for the action policy. Keys match when
/// they are contained in the subtask label; the longest match wins. A failed
/// tick emits a chunk of retries and makes no progress; after
/// `max_consecutive` failed ticks in a row the next tick must progress.
struct FailureProfile {
  double default_prob = 0.0;
  std::map<std::string, double> per_subtask;
  int max_consecutive = 3;
  std::uint64_t seed = 0;
};

/// Compiles latched subtask labels into fixed-length action chunks. Each
/// subtask expands to a fixed number of ticks; fillers pad the motion and
/// the action that makes the subtask's mark on the world comes last, except
/// that grasps come first so a held object is visible immediately. Plans are
/// recompiled from the newest frame every tick, so completed steps are
/// skipped instead of repeated.
class ScriptedLl final : public LlPolicy {
 public:
  ScriptedLl(int chunk_len, int open_loop_exec, FailureProfile profile = {});
  std::vector<Action> plan(const LlContext& ctx) override;
  std::string name() const override { return "scripted"; }

  /// Plan length for a subtask, in ticks.
  static int duration_ticks(SubtaskKind kind);

 private:
  int chunk_len_;
  int exec_;
  FailureProfile profile_;
  std::mt19937_64 rng_;
  std::string label_;
  int progress_ = 0;
  int consecutive_fails_ = 0;
};

/// "oracle", "none", "short", "text", or "noisy:<j>" (an oracle with jittered
/// nominations). Throws ConfigError on anything else.
std::unique_ptr<HlPolicy> make_hl_policy(const std::string& spec,
                                         std::uint64_t seed = 0);

}  // namespace kfm
