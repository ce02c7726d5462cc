// Deterministic event queue standing in for wall time. Events due at the
// same millisecond fire in the order they were scheduled, so a fixed
// registration order yields one canonical interleaving of periodic loops.
#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace kfm {

class VirtualClock {
 public:
  using Callback = std::function<void(std::int64_t now_ms)>;

  void schedule(std::int64_t at_ms, Callback cb) {
    queue_.push(Event{at_ms, next_seq_++, std::move(cb)});
  }

  bool empty() const { return queue_.empty(); }
  std::int64_t now() const { return now_; }

  /// Pops and runs the earliest event. Returns false when nothing is left.
  bool step() {
    if (queue_.empty()) return false;
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.at_ms;
    ev.cb(now_);
    return true;
  }

 private:
  struct Event {
    std::int64_t at_ms;
    std::uint64_t seq;
    Callback cb;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at_ms != b.at_ms) return a.at_ms > b.at_ms;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  std::int64_t now_ = 0;
};

}  // namespace kfm
