#pragma once

#include "kfm/orchestrator.hpp"

// Demonstration generation and training-record export. A demonstration is a
// clean episode replayed into per-frame labels; annotation rules pick at most
// one keyframe per subtask segment; export emits one flat JSON record per
// decision tick in the exact shape the published schema describes.

namespace kfm {

/// The deliberation context and committed label of one decision tick.
struct DecisionPoint {
  std::int64_t tick = 0;  // index of the newest frame visible at the decision
  std::string subtask;
};

struct Demonstration {
  Task task = Task::search;
  std::uint64_t seed = 0;
  nlohmann::json header;  // world snapshot, enough to rebuild the episode
  std::vector<Observation> frames;
  std::vector<std::string> labels;  // per frame: the label being executed
  std::vector<DecisionPoint> decisions;
  TaskScore score;
  bool completed = false;
};

/// Runs the full-memory deliberator with a failure-free action policy and
/// folds the log into a demonstration. Deterministic per (task, seed).
Demonstration generate_demo(Task task, std::uint64_t seed,
                            const RunConfig& cfg = {});

/// The same fold applied to an existing episode log.
Demonstration demo_from_records(const std::vector<Record>& records);

struct SubtaskSegment {
  std::string label;
  FrameIndex start = 0;
  FrameIndex end = 0;  // inclusive
};

/// Maximal runs of one label; the segments partition the demonstration.
std::vector<SubtaskSegment> segments(const Demonstration& demo);

enum class Selector { first, last, none };

std::string to_string(Selector s);
Selector selector_from_string(const std::string& s);  // throws ConfigError

/// Binds a grammar template to the frame its segments contribute.
struct AnnotationRule {
  std::string subtask_pattern;
  Selector selector = Selector::none;
};

/// One rule per grammar template of the task, in grammar order.
const std::vector<AnnotationRule>& default_rules(Task task);

/// Applies the first matching rule to every segment: first -> segment start,
/// last -> segment end, none -> no frame. Ascending, at most one frame per
/// segment. Throws UncoveredLabel when a segment label matches no rule.
std::vector<FrameIndex> annotate(const Demonstration& demo,
                                 const std::vector<AnnotationRule>& rules);

/// One supervised example: the memory and window views at a decision tick
/// plus the label and in-window keyframe positions the deliberator should
/// emit. Frame references are content ids, not paths.
struct PromptRecord {
  std::string system_text;
  std::string user_text;
  std::vector<std::string> keyframe_refs;
  std::vector<std::string> video_refs;  // oldest to newest, at most the window
  nlohmann::json assistant_json;  // {current_subtask, keyframe_positions}
};

nlohmann::json to_json(const PromptRecord& r);
PromptRecord prompt_record_from_json(const nlohmann::json& j);

/// The fixed system text shared by every record.
const std::string& system_prompt_text();
/// The task preamble with the live instruction spliced in.
std::string user_prompt_text(Task task, const std::string& instruction);

/// One record per decision tick. keyframe_refs are the annotated frames that
/// have already left the window (index < tick - window + 1); video_refs are
/// the window; keyframe_positions are the annotated frames still inside the
/// window as 1-indexed positions into video_refs.
std::vector<PromptRecord> export_prompts(const Demonstration& demo,
                                         const std::vector<FrameIndex>& gt_keyframes,
                                         int window);

/// JSON-lines form, one record per line, byte-stable across runs.
std::string serialize_prompts(const std::vector<PromptRecord>& records);

/// Checks a record against the published structural schema (the subset of
/// JSON Schema the file uses: type, required, additionalProperties,
/// properties, items, string/array bounds, integer bounds, pattern as a
/// hex-string check). Throws SchemaMismatch naming the offending path.
void validate_against_schema(const nlohmann::json& record,
                             const nlohmann::json& schema);

}  // namespace kfm
