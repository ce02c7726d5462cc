#include "kfm/memory.hpp"

#include <algorithm>
#include <string>

namespace kfm {

std::vector<FrameIndex> rel_to_abs(FrameIndex tick, int window_len,
                                   const std::vector<int>& positions) {
  if (window_len < 1) {
    throw PositionOutOfRange("window_len must be >= 1, got " +
                             std::to_string(window_len));
  }
  std::vector<FrameIndex> abs;
  abs.reserve(positions.size());
  for (int p : positions) {
    if (p < 1 || p > window_len) {
      throw PositionOutOfRange("position " + std::to_string(p) +
                               " outside [1, " + std::to_string(window_len) + "]");
    }
    abs.push_back(tick - static_cast<FrameIndex>(window_len) + p);
  }
  return abs;
}

NominationBatch NominationBatch::from_positions(FrameIndex tick, int window_len,
                                                std::vector<int> positions) {
  NominationBatch b;
  b.tick = tick;
  b.abs_indices = rel_to_abs(tick, window_len, positions);
  b.positions = std::move(positions);
  std::sort(b.abs_indices.begin(), b.abs_indices.end());
  return b;
}

NominationBatch NominationBatch::from_absolute(FrameIndex tick,
                                               std::vector<FrameIndex> abs) {
  NominationBatch b;
  b.tick = tick;
  std::sort(abs.begin(), abs.end());
  b.abs_indices = std::move(abs);
  return b;
}

std::vector<Cluster> single_linkage(const NominationLog& log, int merge_distance) {
  std::vector<Cluster> out;
  if (log.empty()) return out;
  Cluster cur;
  cur.members.push_back(log.front());
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log[i] - cur.members.back() <= merge_distance) {
      cur.members.push_back(log[i]);
    } else {
      out.push_back(std::move(cur));
      cur = Cluster{};
      cur.members.push_back(log[i]);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

FrameIndex cluster_median(const Cluster& c) {
  if (c.members.empty()) throw EmptyCluster("cluster_median on empty cluster");
  // Lower median: 1-indexed position ceil(k/2) == 0-indexed (k-1)/2.
  return c.members[(c.members.size() - 1) / 2];
}

CapResult enforce_cap(const SelectedKeyframes& selected, int cap) {
  CapResult r;
  if (cap < 1) throw ConfigError("keyframe cap must be >= 1");
  const auto& idx = selected.indices;
  if (static_cast<int>(idx.size()) <= cap) {
    r.kept = selected;
    return r;
  }
  std::size_t drop = idx.size() - static_cast<std::size_t>(cap);
  r.evicted.assign(idx.begin(), idx.begin() + drop);
  r.kept.indices.assign(idx.begin() + drop, idx.end());
  return r;
}

void MemoryConfig::validate() const {
  if (merge_distance < 1) throw ConfigError("merge_distance must be >= 1");
  if (window < 1) throw ConfigError("window must be >= 1");
  if (cap < 1) throw ConfigError("cap must be >= 1");
}

void KeyframeMemory::ingest(const NominationBatch& batch) {
  if (batch.tick < last_tick_) {
    throw NonMonotonicTick("batch tick " + std::to_string(batch.tick) +
                           " precedes " + std::to_string(last_tick_));
  }
  for (FrameIndex a : batch.abs_indices) {
    if (a > batch.tick) {
      throw PositionOutOfRange("nomination " + std::to_string(a) +
                               " is in the future of tick " +
                               std::to_string(batch.tick));
    }
    if (!frozen_.empty() &&
        a <= frozen_.back().members.back() + cfg_.merge_distance) {
      // Window-constrained batches can never reach back this far; anything
      // that does would have to reopen a frozen cluster.
      throw PositionOutOfRange("nomination " + std::to_string(a) +
                               " reaches behind the freeze boundary");
    }
  }
  last_tick_ = batch.tick;

  if (!batch.abs_indices.empty()) {
    // Fold the new indices into the log, then relink the active region.
    for (FrameIndex a : batch.abs_indices) {
      log_.insert(std::upper_bound(log_.begin(), log_.end(), a), a);
    }
    NominationLog pool;
    for (const Cluster& c : active_) {
      pool.insert(pool.end(), c.members.begin(), c.members.end());
    }
    pool.insert(pool.end(), batch.abs_indices.begin(), batch.abs_indices.end());
    std::sort(pool.begin(), pool.end());
    active_ = single_linkage(pool, cfg_.merge_distance);
  }

  // Freeze boundary only moves forward; a cluster whose newest member lies
  // before tick - window + 1 - d is out of reach of all future nominations.
  const FrameIndex threshold =
      batch.tick - static_cast<FrameIndex>(cfg_.window) + 1 -
      static_cast<FrameIndex>(cfg_.merge_distance);
  std::size_t n_freeze = 0;
  while (n_freeze < active_.size() &&
         active_[n_freeze].members.back() < threshold) {
    ++n_freeze;
  }
  for (std::size_t i = 0; i < n_freeze; ++i) {
    Cluster c = std::move(active_[i]);
    c.frozen = true;
    frozen_medians_.push_back(cluster_median(c));
    frozen_.push_back(std::move(c));
  }
  if (n_freeze > 0) {
    active_.erase(active_.begin(),
                  active_.begin() + static_cast<std::ptrdiff_t>(n_freeze));
  }
}

SelectedKeyframes KeyframeMemory::selected_keyframes(FrameIndex tick) const {
  const FrameIndex exit_bound = tick - static_cast<FrameIndex>(cfg_.window) + 1;
  SelectedKeyframes out;
  for (FrameIndex m : frozen_medians_) {
    if (m < exit_bound) out.indices.push_back(m);
  }
  for (const Cluster& c : active_) {
    FrameIndex m = cluster_median(c);
    if (m < exit_bound) out.indices.push_back(m);
  }
  return out;
}

std::vector<Cluster> KeyframeMemory::clusters() const {
  std::vector<Cluster> all = frozen_;
  all.insert(all.end(), active_.begin(), active_.end());
  return all;
}

}  // namespace kfm
