#pragma once

#include <cstdint>
#include <vector>

#include "kfm/errors.hpp"

// Streaming episodic keyframe memory.
//
// The high-level policy nominates frame positions out of its recent
// observation window. Nominations are pooled (duplicates preserved) into a
// temporally sorted multiset, grouped by 1D single linkage with merge
// distance d (adjacent indices belong to one group iff they differ by at
// most d), and each group is represented by its lower-median member.
// Repeated nomination of the same frame across consecutive ticks therefore
// pulls the representative toward the frames nominated most often.
//
// A group whose newest member is older than tick - window + 1 - d can never
// gain another member (fresh nominations always come from inside the window),
// so it is frozen: its membership and median are fixed for the rest of the
// episode and are not touched by later ingests. Only the frames that have
// already exited the recent window are surfaced as keyframes; groups whose
// median is still inside the window stay pending.

namespace kfm {

using FrameIndex = std::int64_t;

/// Maps 1-indexed window positions to absolute frame indices:
/// abs = tick - window_len + p.
/// Throws PositionOutOfRange unless 1 <= p <= window_len for every p.
std::vector<FrameIndex> rel_to_abs(FrameIndex tick, int window_len,
                                   const std::vector<int>& positions);

/// One high-level tick's worth of nominations.
struct NominationBatch {
  FrameIndex tick = 0;
  std::vector<int> positions;           ///< 1-indexed, as emitted by the policy
  std::vector<FrameIndex> abs_indices;  ///< ascending

  /// Validating constructor: positions must lie in [1, window_len].
  static NominationBatch from_positions(FrameIndex tick, int window_len,
                                        std::vector<int> positions);
  /// Test/bootstrap constructor: takes absolute indices directly.
  static NominationBatch from_absolute(FrameIndex tick,
                                       std::vector<FrameIndex> abs);
};

/// Ascending multiset of every nomination so far (duplicates preserved).
using NominationLog = std::vector<FrameIndex>;

struct Cluster {
  std::vector<FrameIndex> members;  ///< ascending, non-empty, adjacent gaps <= d
  bool frozen = false;
};

/// Groups a sorted nomination multiset with 1D single linkage. Adjacent
/// members at distance <= merge_distance share a cluster; empty input gives
/// an empty result. Output clusters are ordered by their smallest member.
std::vector<Cluster> single_linkage(const NominationLog& log, int merge_distance);

/// Lower median: the member at sorted position ceil(k/2), 1-indexed.
/// {1,3,3,4} -> 3, {2,4} -> 2. Throws EmptyCluster on an empty cluster.
FrameIndex cluster_median(const Cluster& c);

struct SelectedKeyframes {
  std::vector<FrameIndex> indices;  ///< ascending
};

struct CapResult {
  SelectedKeyframes kept;
  std::vector<FrameIndex> evicted;  ///< oldest first
};

/// Keeps the newest `cap` indices, dropping the oldest.
CapResult enforce_cap(const SelectedKeyframes& selected, int cap);

struct MemoryConfig {
  int merge_distance = 5;  ///< d
  int window = 8;          ///< N, recent-window length
  int cap = 8;             ///< max keyframes handed to the policy

  void validate() const;
};

/// Incremental form of the consolidation pipeline. After every ingest the
/// frozen and active clusters together partition single_linkage(log()).
class KeyframeMemory {
 public:
  KeyframeMemory() { cfg_.validate(); }
  explicit KeyframeMemory(MemoryConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  /// Folds one batch in. Ticks must be non-decreasing (NonMonotonicTick).
  /// Also advances the freeze boundary even when the batch is empty.
  void ingest(const NominationBatch& batch);

  /// Medians of all clusters whose median has exited the recent window
  /// (median < tick - window + 1), ascending. Not capped; callers apply
  /// enforce_cap so evictions can be reported.
  SelectedKeyframes selected_keyframes(FrameIndex tick) const;

  const NominationLog& log() const { return log_; }
  const std::vector<Cluster>& frozen_clusters() const { return frozen_; }
  const std::vector<Cluster>& active_clusters() const { return active_; }
  /// Frozen then active, i.e. ordered by smallest member.
  std::vector<Cluster> clusters() const;
  const MemoryConfig& config() const { return cfg_; }
  FrameIndex last_tick() const { return last_tick_; }

 private:
  MemoryConfig cfg_{};
  NominationLog log_;
  std::vector<Cluster> frozen_;
  std::vector<FrameIndex> frozen_medians_;
  std::vector<Cluster> active_;
  FrameIndex last_tick_ = -1;
};

}  // namespace kfm
