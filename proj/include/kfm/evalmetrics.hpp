#pragma once

#include <string>
#include <vector>

#include "kfm/datagen.hpp"

// Offline label-prediction metrics and the aggregate score report.

namespace kfm {

/// Per-tick predicted (or ground-truth) subtask labels.
using PredictionTrace = std::vector<std::string>;

/// Mean per-tick exact label equality. Throws LengthMismatch when the traces
/// differ in length, EmptyTrace on empty input.
double trajectory_accuracy(const PredictionTrace& pred,
                           const PredictionTrace& gt);

struct BoundarySpec {
  int half_width = 4;  // ticks on each side of a transition
};

/// Accuracy restricted to the union of [tau - w, tau + w] around every
/// ground-truth transition (gt[tau] != gt[tau - 1]), clamped to the trace.
/// Overlapping windows count each tick once. Throws NoTransitions on a
/// constant ground truth, ConfigError on a negative half width.
double boundary_accuracy(const PredictionTrace& pred, const PredictionTrace& gt,
                         const BoundarySpec& spec = {});

/// One finished episode attributed to the method that produced it.
struct ScoredEpisode {
  std::string method;
  TaskScore score;
};

/// Per-method totals: raw counts summed over episodes, one column per
/// task-specific component.
struct ReportRow {
  std::string method;
  int search_episodes = 0;
  int counting_episodes = 0;
  int dust_episodes = 0;
  int retrieved = 0;      // search: objects placed in the white bin
  int optimal = 0;        // search: instructions solved without re-looking
  int wrong_scoops = 0;   // counting: pour-count error, lower is better
  int dust_bottom = 0;    // dust: episodes with the bottom shelf dusted
  int dust_top = 0;
  int replace_bottom = 0;  // dust: original object back on its shelf
  int replace_top = 0;
};

nlohmann::json to_json(const ReportRow& r);

/// Sums per-episode scores per method with no normalization. Rows come out
/// sorted by method name; an empty batch gives an empty report.
std::vector<ReportRow> report(const std::vector<ScoredEpisode>& episodes);

/// Fixed-width text rendering; empty report renders to an empty string.
std::string render_table(const std::vector<ReportRow>& rows);

struct TracePair {
  PredictionTrace pred;
  PredictionTrace gt;
};

/// Re-decides every decision tick of a demonstration and pairs the policy's
/// label with the demonstrated one. Contexts are rebuilt exactly as the
/// runtime loop would: the window ends at the decision tick, keyframes are
/// the annotated frames that have already left the window, and the label
/// history holds strictly earlier commits.
TracePair offline_traces(const Demonstration& demo, HlPolicy& policy,
                         const std::vector<FrameIndex>& gt_keyframes,
                         int window);

}  // namespace kfm
